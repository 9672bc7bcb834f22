// Versioned on-disk formats for every pipeline artifact.
//
//   geometry   flat key-value text, `# tridoa geometry v1` header
//   directions JSON {version, kind:"directions", n, entries:[[theta,phi]...]}
//   mappings   JSON {version, kind:"mappings", n, geometry?, entries:[[theta,phi,r12,r13,r23]...]}
//   config     JSON, all fields optional with spec defaults
//   events     JSON lines, exactly one record per hop, each tagged "v":1
//   scene      JSON (angles in degrees for readability)
//   truth      JSON lines
//   dataset    CSV with a header row: theta,phi,r12,r13,r23[,distance]
//
// Loaders reject unknown versions and malformed records with IoError.
#pragma once

#include <string>
#include <vector>

#include "tridoa/geometry.hpp"
#include "tridoa/lattice.hpp"
#include "tridoa/pipeline.hpp"
#include "tridoa/simulate.hpp"
#include "tridoa/wav.hpp"

namespace tridoa {

void save_geometry(const std::string& path, const ArrayGeometry& g);
ArrayGeometry load_geometry(const std::string& path);

void save_directions(const std::string& path, const std::vector<Direction>& dirs);
std::vector<Direction> load_directions(const std::string& path);

void save_lattice(const std::string& path, const MappingLattice& lattice);
MappingLattice load_lattice(const std::string& path);

void save_config(const std::string& path, const PipelineConfig& cfg);
PipelineConfig load_config(const std::string& path);

void save_events(const std::string& path, const std::vector<FrameEvent>& events);
std::vector<FrameEvent> load_events(const std::string& path);

void save_scene(const std::string& path, const SceneSpec& scene);
SceneSpec load_scene(const std::string& path);

void save_truth(const std::string& path, const TruthLog& truth);
TruthLog load_truth(const std::string& path);

void save_dataset(const std::string& path, const FieldDataset& ds);
FieldDataset load_dataset(const std::string& path);

std::string format_sweep_table(const std::vector<SweepRow>& rows);
std::string format_tracking_report(const TrackingReport& report);

}  // namespace tridoa
