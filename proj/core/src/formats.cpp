#include "tridoa/formats.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tridoa {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::kFile, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoError::Kind::kFile, "cannot write " + path);
    out << text;
    if (!out) throw IoError(IoError::Kind::kFile, "short write to " + path);
}

json parse(const std::string& text, const std::string& path) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw IoError(IoError::Kind::kFormat, path + ": invalid JSON");
    return j;
}

void check_version(const json& j, const std::string& path) {
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw IoError(IoError::Kind::kSchema, path + ": missing version");
    if (j["version"].get<int>() != 1)
        throw IoError(IoError::Kind::kSchema,
                      path + ": unsupported version " + j["version"].dump());
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_geometry(const std::string& path, const ArrayGeometry& g) {
    std::ostringstream ss;
    ss << "# tridoa geometry v1\n";
    ss << "b = " << fmt_double(g.b) << "\n";
    ss << "c_x = " << fmt_double(g.c_x) << "\n";
    ss << "c_y = " << fmt_double(g.c_y) << "\n";
    spill(path, ss.str());
}

ArrayGeometry load_geometry(const std::string& path) {
    std::istringstream in(slurp(path));
    std::string header;
    std::getline(in, header);
    if (header.rfind("# tridoa geometry v", 0) != 0)
        throw IoError(IoError::Kind::kSchema, path + ": missing geometry header");
    if (header != "# tridoa geometry v1")
        throw IoError(IoError::Kind::kSchema, path + ": unsupported geometry version");

    ArrayGeometry g{0.0, 0.0, 0.0};
    bool have_b = false, have_cx = false, have_cy = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key, eq;
        double value;
        if (!(ls >> key >> eq >> value) || eq != "=")
            throw IoError(IoError::Kind::kFormat, path + ": bad line '" + line + "'");
        if (key == "b") { g.b = value; have_b = true; }
        else if (key == "c_x") { g.c_x = value; have_cx = true; }
        else if (key == "c_y") { g.c_y = value; have_cy = true; }
        else throw IoError(IoError::Kind::kSchema, path + ": unknown key '" + key + "'");
    }
    if (!have_b || !have_cx || !have_cy)
        throw IoError(IoError::Kind::kSchema, path + ": geometry needs b, c_x and c_y");
    if (!g.is_valid())
        throw IoError(IoError::Kind::kSchema, path + ": degenerate geometry (b > 0, c_y != 0)");
    return g;
}

void save_directions(const std::string& path, const std::vector<Direction>& dirs) {
    json j;
    j["version"] = 1;
    j["kind"] = "directions";
    j["n"] = dirs.size();
    json entries = json::array();
    for (const auto& d : dirs) entries.push_back({d.theta, d.phi});
    j["entries"] = std::move(entries);
    spill(path, j.dump() + "\n");
}

std::vector<Direction> load_directions(const std::string& path) {
    json j = parse(slurp(path), path);
    check_version(j, path);
    if (j.value("kind", "") != "directions")
        throw IoError(IoError::Kind::kSchema, path + ": not a directions file");
    std::vector<Direction> out;
    for (const auto& e : j.at("entries")) {
        if (!e.is_array() || e.size() != 2)
            throw IoError(IoError::Kind::kSchema, path + ": direction entries need 2 fields");
        out.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    if (j.at("n").get<size_t>() != out.size())
        throw IoError(IoError::Kind::kSchema, path + ": entry count does not match n");
    return out;
}

void save_lattice(const std::string& path, const MappingLattice& lattice) {
    json j;
    j["version"] = 1;
    j["kind"] = "mappings";
    j["n"] = lattice.size();
    if (lattice.geometry()) {
        const auto& g = *lattice.geometry();
        j["geometry"] = {{"b", g.b}, {"c_x", g.c_x}, {"c_y", g.c_y}};
    }
    json entries = json::array();
    for (size_t i = 0; i < lattice.size(); ++i) {
        const Direction& d = lattice.directions()[i];
        const TdoaTriple& q = lattice.tdoas()[i];
        entries.push_back({d.theta, d.phi, q.r12, q.r13, q.r23});
    }
    j["entries"] = std::move(entries);
    spill(path, j.dump() + "\n");
}

MappingLattice load_lattice(const std::string& path) {
    json j = parse(slurp(path), path);
    check_version(j, path);
    if (j.value("kind", "") != "mappings")
        throw IoError(IoError::Kind::kSchema, path + ": not a mapping-lattice file");
    std::vector<Direction> dirs;
    std::vector<TdoaTriple> tdoas;
    for (const auto& e : j.at("entries")) {
        if (!e.is_array() || e.size() != 5)
            throw IoError(IoError::Kind::kSchema, path + ": mapping entries need 5 fields");
        dirs.push_back({e[0].get<double>(), e[1].get<double>()});
        tdoas.push_back({e[2].get<double>(), e[3].get<double>(), e[4].get<double>()});
    }
    if (j.at("n").get<size_t>() != dirs.size())
        throw IoError(IoError::Kind::kSchema, path + ": entry count does not match n");
    std::optional<ArrayGeometry> g;
    if (j.contains("geometry")) {
        const json& jg = j["geometry"];
        g = ArrayGeometry{jg.at("b").get<double>(), jg.at("c_x").get<double>(),
                          jg.at("c_y").get<double>()};
    }
    return MappingLattice(std::move(dirs), std::move(tdoas), g);
}

void save_config(const std::string& path, const PipelineConfig& cfg) {
    json j;
    j["version"] = 1;
    j["fs"] = cfg.sample_rate;
    j["frame_len"] = cfg.frame_len;
    j["overlap"] = 0.5;
    j["c"] = cfg.speed_of_sound;
    j["weighting"] = {{"gamma", cfg.weighting.gamma}, {"eps", cfg.weighting.floor_eps}};
    j["window"] = cfg.window == WindowKind::kHann ? "hann" : "rect";
    j["thresholds"] = {{"t_r", cfg.thresholds.t_r},
                       {"t_beta", cfg.thresholds.t_beta},
                       {"t_q", cfg.thresholds.t_q}};
    j["tracker"] = {{"n_clusters", cfg.tracker.n_clusters}, {"dt", cfg.tracker.dt},
                    {"d_min", cfg.tracker.d_min},           {"n_s", cfg.tracker.n_s},
                    {"alpha", cfg.tracker.alpha},           {"t_win", cfg.tracker.t_win},
                    {"t_a", cfg.tracker.t_a}};
    j["far_field_r"] = cfg.far_field_r;
    spill(path, j.dump(2) + "\n");
}

PipelineConfig load_config(const std::string& path) {
    json j = parse(slurp(path), path);
    check_version(j, path);
    PipelineConfig cfg;
    cfg.sample_rate = j.value("fs", cfg.sample_rate);
    cfg.frame_len = j.value("frame_len", cfg.frame_len);
    if (j.contains("overlap") && j["overlap"].get<double>() != 0.5)
        throw IoError(IoError::Kind::kSchema, path + ": overlap is fixed at 0.5");
    cfg.speed_of_sound = j.value("c", cfg.speed_of_sound);
    if (j.contains("weighting")) {
        cfg.weighting.gamma = j["weighting"].value("gamma", cfg.weighting.gamma);
        cfg.weighting.floor_eps = j["weighting"].value("eps", cfg.weighting.floor_eps);
    }
    if (j.contains("window")) {
        std::string w = j["window"].get<std::string>();
        if (w == "hann") cfg.window = WindowKind::kHann;
        else if (w == "rect") cfg.window = WindowKind::kRect;
        else throw IoError(IoError::Kind::kSchema, path + ": unknown window '" + w + "'");
    }
    if (j.contains("thresholds")) {
        cfg.thresholds.t_r = j["thresholds"].value("t_r", cfg.thresholds.t_r);
        cfg.thresholds.t_beta = j["thresholds"].value("t_beta", cfg.thresholds.t_beta);
        cfg.thresholds.t_q = j["thresholds"].value("t_q", cfg.thresholds.t_q);
    }
    cfg.tracker.dt = static_cast<double>(cfg.frame_len) / (2.0 * cfg.sample_rate);
    if (j.contains("tracker")) {
        const json& t = j["tracker"];
        cfg.tracker.n_clusters = t.value("n_clusters", cfg.tracker.n_clusters);
        cfg.tracker.dt = t.value("dt", cfg.tracker.dt);
        cfg.tracker.d_min = t.value("d_min", cfg.tracker.d_min);
        cfg.tracker.n_s = t.value("n_s", cfg.tracker.n_s);
        cfg.tracker.alpha = t.value("alpha", cfg.tracker.alpha);
        cfg.tracker.t_win = t.value("t_win", cfg.tracker.t_win);
        cfg.tracker.t_a = t.value("t_a", cfg.tracker.t_a);
    }
    cfg.far_field_r = j.value("far_field_r", cfg.far_field_r);
    try {
        validate(cfg);
    } catch (const std::invalid_argument& e) {
        throw IoError(IoError::Kind::kSchema, path + ": " + e.what());
    }
    return cfg;
}

namespace {

json event_to_json(const FrameEvent& ev) {
    json j;
    j["v"] = 1;
    j["k"] = ev.frame;
    j["t"] = ev.time_s;
    json pairs = json::array();
    for (const auto& p : ev.pairs)
        pairs.push_back({{"lag", p.lag}, {"tdoa", p.tdoa}, {"peak", p.peak}, {"beta", p.beta}});
    j["pairs"] = std::move(pairs);
    j["accepted"] = ev.accepted;
    j["stage"] = to_string(ev.failed_stage);
    j["nns_e"] = ev.nns_error;
    if (ev.direction) j["dir"] = {{"theta", ev.direction->theta}, {"phi", ev.direction->phi}};
    json clusters = json::array();
    for (const auto& c : ev.clusters)
        clusters.push_back({c.id, c.direction.theta, c.direction.phi, c.rho, c.detected});
    j["clusters"] = std::move(clusters);
    json tev = json::array();
    for (const auto& e : ev.tracker_events) tev.push_back({to_string(e.kind), e.cluster_id});
    j["events"] = std::move(tev);
    return j;
}

FilterStage stage_from_string(const std::string& s, const std::string& path) {
    if (s == "none") return FilterStage::kNone;
    if (s == "activity") return FilterStage::kActivity;
    if (s == "dominance") return FilterStage::kDominance;
    if (s == "coherence") return FilterStage::kCoherence;
    throw IoError(IoError::Kind::kSchema, path + ": unknown filter stage '" + s + "'");
}

TrackerEventKind event_kind_from_string(const std::string& s, const std::string& path) {
    if (s == "source_appeared") return TrackerEventKind::kSourceAppeared;
    if (s == "source_lost") return TrackerEventKind::kSourceLost;
    if (s == "cluster_forgotten") return TrackerEventKind::kClusterForgotten;
    throw IoError(IoError::Kind::kSchema, path + ": unknown tracker event '" + s + "'");
}

}  // namespace

void save_events(const std::string& path, const std::vector<FrameEvent>& events) {
    std::ostringstream ss;
    for (const auto& ev : events) ss << event_to_json(ev).dump() << "\n";
    spill(path, ss.str());
}

std::vector<FrameEvent> load_events(const std::string& path) {
    std::istringstream in(slurp(path));
    std::vector<FrameEvent> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse(line, path + ":" + std::to_string(lineno));
        if (j.value("v", -1) != 1)
            throw IoError(IoError::Kind::kSchema, path + ": unsupported event record version");
        FrameEvent ev;
        ev.frame = j.at("k").get<size_t>();
        ev.time_s = j.at("t").get<double>();
        const json& pairs = j.at("pairs");
        if (!pairs.is_array() || pairs.size() != 3)
            throw IoError(IoError::Kind::kSchema, path + ": event needs 3 pair records");
        for (size_t p = 0; p < 3; ++p) {
            ev.pairs[p].lag = pairs[p].at("lag").get<double>();
            ev.pairs[p].tdoa = pairs[p].at("tdoa").get<double>();
            ev.pairs[p].peak = pairs[p].at("peak").get<double>();
            ev.pairs[p].beta = pairs[p].at("beta").get<double>();
        }
        ev.accepted = j.at("accepted").get<bool>();
        ev.failed_stage = stage_from_string(j.at("stage").get<std::string>(), path);
        ev.nns_error = j.at("nns_e").get<double>();
        if (j.contains("dir"))
            ev.direction = Direction{j["dir"].at("theta").get<double>(),
                                     j["dir"].at("phi").get<double>()};
        for (const auto& c : j.at("clusters")) {
            if (!c.is_array() || c.size() != 5)
                throw IoError(IoError::Kind::kSchema, path + ": cluster entries need 5 fields");
            ev.clusters.push_back({c[0].get<int>(),
                                   {c[1].get<double>(), c[2].get<double>()},
                                   c[3].get<double>(),
                                   c[4].get<bool>()});
        }
        for (const auto& e : j.at("events"))
            ev.tracker_events.push_back(
                {event_kind_from_string(e[0].get<std::string>(), path), e[1].get<int>(), ev.time_s});
        out.push_back(std::move(ev));
    }
    return out;
}

void save_scene(const std::string& path, const SceneSpec& scene) {
    json j;
    j["version"] = 1;
    j["fs"] = scene.sample_rate;
    j["duration_s"] = scene.duration_s;
    j["c"] = scene.speed_of_sound;
    j["seed"] = scene.seed;
    j["truth_hop_s"] = scene.truth_hop_s;
    if (scene.snr_db) j["snr_db"] = *scene.snr_db;
    j["geometry"] = {{"b", scene.geometry.b}, {"c_x", scene.geometry.c_x},
                     {"c_y", scene.geometry.c_y}};
    if (scene.rotation) j["rotation"] = {{"period_s", scene.rotation->period_s}};
    json sources = json::array();
    for (const auto& s : scene.sources) {
        json js;
        js["theta_deg"] = s.direction.theta * 180.0 / kPi;
        js["phi_deg"] = s.direction.phi * 180.0 / kPi;
        js["distance"] = s.distance;
        js["kind"] = s.kind == SourceKind::kWhiteNoise ? "white_noise" : "am_bursts";
        if (s.kind == SourceKind::kAmNoiseBursts) {
            js["period_ms"] = s.burst_period_ms;
            js["duty"] = s.burst_duty;
            js["phase_ms"] = s.burst_phase_ms;
        }
        if (!s.active_intervals.empty()) {
            json iv = json::array();
            for (const auto& [a, b] : s.active_intervals) iv.push_back({a, b});
            js["intervals"] = std::move(iv);
        }
        sources.push_back(std::move(js));
    }
    j["sources"] = std::move(sources);
    spill(path, j.dump(2) + "\n");
}

SceneSpec load_scene(const std::string& path) {
    json j = parse(slurp(path), path);
    check_version(j, path);
    SceneSpec scene;
    scene.sample_rate = j.value("fs", scene.sample_rate);
    scene.duration_s = j.value("duration_s", scene.duration_s);
    scene.speed_of_sound = j.value("c", scene.speed_of_sound);
    scene.seed = j.value("seed", scene.seed);
    scene.truth_hop_s = j.value("truth_hop_s", scene.truth_hop_s);
    if (j.contains("snr_db")) scene.snr_db = j["snr_db"].get<double>();
    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        scene.geometry = {g.at("b").get<double>(), g.at("c_x").get<double>(),
                          g.at("c_y").get<double>()};
    }
    if (j.contains("rotation")) scene.rotation = RotationSpec{j["rotation"].at("period_s").get<double>()};
    for (const auto& js : j.value("sources", json::array())) {
        SourceSpec s;
        s.direction.theta = js.at("theta_deg").get<double>() * kPi / 180.0;
        s.direction.phi = js.at("phi_deg").get<double>() * kPi / 180.0;
        s.distance = js.value("distance", s.distance);
        std::string kind = js.value("kind", "white_noise");
        if (kind == "white_noise") s.kind = SourceKind::kWhiteNoise;
        else if (kind == "am_bursts") s.kind = SourceKind::kAmNoiseBursts;
        else throw IoError(IoError::Kind::kSchema, path + ": unknown source kind '" + kind + "'");
        s.burst_period_ms = js.value("period_ms", s.burst_period_ms);
        s.burst_duty = js.value("duty", s.burst_duty);
        s.burst_phase_ms = js.value("phase_ms", s.burst_phase_ms);
        for (const auto& iv : js.value("intervals", json::array()))
            s.active_intervals.emplace_back(iv[0].get<double>(), iv[1].get<double>());
        scene.sources.push_back(std::move(s));
    }
    try {
        validate(scene);
    } catch (const std::invalid_argument& e) {
        throw IoError(IoError::Kind::kSchema, path + ": " + e.what());
    }
    return scene;
}

void save_truth(const std::string& path, const TruthLog& truth) {
    std::ostringstream ss;
    for (const auto& rec : truth.records) {
        json j;
        j["t"] = rec.time_s;
        json sources = json::array();
        for (const auto& s : rec.sources)
            sources.push_back({{"id", s.source}, {"theta", s.direction.theta},
                               {"phi", s.direction.phi}});
        j["sources"] = std::move(sources);
        ss << j.dump() << "\n";
    }
    spill(path, ss.str());
}

TruthLog load_truth(const std::string& path) {
    std::istringstream in(slurp(path));
    TruthLog out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse(line, path + ":" + std::to_string(lineno));
        TruthRecord rec;
        rec.time_s = j.at("t").get<double>();
        for (const auto& s : j.at("sources"))
            rec.sources.push_back({s.at("id").get<int>(),
                                   {s.at("theta").get<double>(), s.at("phi").get<double>()}});
        out.records.push_back(std::move(rec));
    }
    return out;
}

void save_dataset(const std::string& path, const FieldDataset& ds) {
    bool any_distance = false;
    for (const auto& r : ds.records) any_distance |= r.distance.has_value();
    std::ostringstream ss;
    ss << "theta,phi,r12,r13,r23" << (any_distance ? ",distance" : "") << "\n";
    for (const auto& r : ds.records) {
        ss << fmt_double(r.direction.theta) << "," << fmt_double(r.direction.phi) << ","
           << fmt_double(r.tdoa.r12) << "," << fmt_double(r.tdoa.r13) << ","
           << fmt_double(r.tdoa.r23);
        if (any_distance) ss << "," << fmt_double(r.distance.value_or(0.0));
        ss << "\n";
    }
    spill(path, ss.str());
}

FieldDataset load_dataset(const std::string& path) {
    std::istringstream in(slurp(path));
    std::string header;
    if (!std::getline(in, header))
        throw IoError(IoError::Kind::kFormat, path + ": empty dataset");
    bool with_distance;
    if (header == "theta,phi,r12,r13,r23") with_distance = false;
    else if (header == "theta,phi,r12,r13,r23,distance") with_distance = true;
    else throw IoError(IoError::Kind::kSchema, path + ": unrecognized dataset header '" + header + "'");

    FieldDataset out;
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> vals;
        std::string field;
        while (std::getline(ls, field, ',')) {
            try {
                vals.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw IoError(IoError::Kind::kFormat,
                              path + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
            }
        }
        size_t expect = with_distance ? 6 : 5;
        if (vals.size() != expect)
            throw IoError(IoError::Kind::kFormat,
                          path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(expect) + " fields");
        FieldRecord rec{{vals[0], vals[1]}, {vals[2], vals[3], vals[4]}, std::nullopt};
        if (with_distance) rec.distance = vals[5];
        out.records.push_back(rec);
    }
    return out;
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream ss;
    ss << "# sigma_m rmse_nns rmse_cf rmse_cf_miscal rmse_cf_cal\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-10.4g %-10.6g %-10.6g %-14.6g %-10.6g\n", r.sigma,
                      r.rmse_nns, r.rmse_cf, r.rmse_cf_miscal, r.rmse_cf_cal);
        ss << buf;
    }
    return ss.str();
}

std::string format_tracking_report(const TrackingReport& report) {
    std::ostringstream ss;
    ss << "detected_clusters: " << report.detected_count << "\n";
    ss << "ghost_time_s: " << report.ghost_time_s << "\n";
    ss << "duration_s: " << report.duration_s << "\n";
    for (size_t i = 0; i < report.per_source.size(); ++i) {
        const SourceReport& s = report.per_source[i];
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "source %zu: matched %zu (coverage %.3f), mean angle %.2f deg, "
                      "within_tol %.3f, az_within_tol %.3f\n",
                      i, s.matched_frames, s.coverage, s.mean_angle_deg, s.frac_within_tol,
                      s.frac_az_within_tol);
        ss << buf;
    }
    return ss.str();
}

}  // namespace tridoa
