#include "tridoa/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "tridoa/calibrate.hpp"

namespace tridoa {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 substream(uint64_t seed, uint64_t stream) {
    return std::mt19937_64(splitmix64(seed * 0x100000001b3ULL + stream));
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    double px = kPi * x;
    return std::sin(px) / px;
}

constexpr int kHalfTaps = 32;  // 64-tap fractional-delay kernel

// Blackman window over [-H, H]
double taper(double x) {
    double u = kPi * x / kHalfTaps;
    return 0.42 + 0.5 * std::cos(u) + 0.08 * std::cos(2.0 * u);
}

void make_kernel(double frac, std::array<double, 2 * kHalfTaps>& k) {
    for (int j = -kHalfTaps + 1; j <= kHalfTaps; ++j) {
        double u = static_cast<double>(j) - frac;
        k[static_cast<size_t>(j + kHalfTaps - 1)] =
            (std::abs(u) < kHalfTaps) ? sinc(u) * taper(u) : 0.0;
    }
}

// Band-limited white noise: unit-variance Gaussian through a 127-tap
// Blackman-windowed sinc lowpass (band edge ~0.79 of Nyquist).
std::vector<double> bandlimited_noise(std::mt19937_64& rng, size_t n) {
    constexpr int kTaps = 127;
    constexpr double kCutoff = 0.395;  // cycles per sample
    static const std::vector<double> fir = [] {
        std::vector<double> h(kTaps);
        int mid = kTaps / 2;
        double sum = 0.0;
        for (int i = 0; i < kTaps; ++i) {
            double m = i - mid;
            double w = 0.42 + 0.5 * std::cos(kPi * m / mid) + 0.08 * std::cos(2.0 * kPi * m / mid);
            h[static_cast<size_t>(i)] = 2.0 * kCutoff * sinc(2.0 * kCutoff * m) * w;
            sum += h[static_cast<size_t>(i)];
        }
        // normalize for unit white-noise power through the band
        double e = 0.0;
        for (double v : h) e += v * v;
        double g = 1.0 / std::sqrt(e);
        for (double& v : h) v *= g;
        return h;
    }();

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> white(n + kTaps);
    for (double& v : white) v = gauss(rng);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < kTaps; ++j) acc += fir[static_cast<size_t>(j)] * white[i + static_cast<size_t>(j)];
        out[i] = acc;
    }
    return out;
}

bool in_intervals(const SourceSpec& src, double t) {
    if (src.active_intervals.empty()) return t >= 0.0;
    for (const auto& [s, e] : src.active_intervals)
        if (t >= s && t < e) return true;
    return false;
}

double envelope(const SourceSpec& src, double t) {
    if (t < 0.0 || !in_intervals(src, t)) return 0.0;
    if (src.kind == SourceKind::kWhiteNoise) return 1.0;
    double period = src.burst_period_ms / 1000.0;
    double phase = std::fmod(t - src.burst_phase_ms / 1000.0, period);
    if (phase < 0.0) phase += period;
    return phase < src.burst_duty * period ? 1.0 : 0.0;
}

Direction direction_at(const SceneSpec& spec, const SourceSpec& src, double t) {
    double theta = src.direction.theta;
    if (spec.rotation) theta = wrap_angle(theta + 2.0 * kPi * t / spec.rotation->period_s);
    return {theta, src.direction.phi};
}

}  // namespace

void validate(const SceneSpec& spec) {
    validate(spec.geometry);
    if (!(spec.duration_s > 0.0)) throw std::invalid_argument("scene: duration must be positive");
    if (!(spec.sample_rate > 0.0)) throw std::invalid_argument("scene: sample rate must be positive");
    if (!(spec.truth_hop_s > 0.0)) throw std::invalid_argument("scene: truth hop must be positive");
    if (spec.rotation && !(spec.rotation->period_s > 0.0))
        throw std::invalid_argument("scene: rotation period must be positive");
    double max_spacing =
        std::max({spec.geometry.d12(), spec.geometry.d13(), spec.geometry.d23()});
    for (const auto& src : spec.sources) {
        if (!(src.distance > 10.0 * max_spacing))
            throw std::invalid_argument("scene: source distance must exceed 10 x mic spacing");
        if (src.direction.phi < 0.0 || src.direction.phi > kPi / 2.0)
            throw std::invalid_argument("scene: source elevation out of [0, pi/2]");
        double max_delay = (src.distance + max_spacing) / spec.speed_of_sound * spec.sample_rate;
        if (max_delay + 2 * kHalfTaps > spec.sample_rate)
            throw std::invalid_argument("scene: source delay exceeds the 1 s delay-line support");
        if (src.kind == SourceKind::kAmNoiseBursts) {
            if (!(src.burst_period_ms > 0.0) || !(src.burst_duty > 0.0) || src.burst_duty > 1.0)
                throw std::invalid_argument("scene: invalid burst parameters");
        }
    }
}

RenderedScene render_scene(const SceneSpec& spec) {
    validate(spec);
    const size_t n = static_cast<size_t>(std::llround(spec.duration_s * spec.sample_rate));
    const double fs = spec.sample_rate;

    RenderedScene out;
    out.sample_rate = fs;
    std::array<std::vector<double>, 3> mix;
    for (auto& m : mix) m.assign(n, 0.0);

    for (size_t c = 0; c < spec.sources.size(); ++c) {
        const SourceSpec& src = spec.sources[c];
        double max_delay =
            (src.distance + std::max({spec.geometry.d12(), spec.geometry.d13(),
                                      spec.geometry.d23()})) /
            spec.speed_of_sound * fs;
        const size_t preroll = std::max<size_t>(static_cast<size_t>(max_delay) + 2 * kHalfTaps, 256);

        auto rng = substream(spec.seed, 100 + c);
        std::vector<double> base = bandlimited_noise(rng, n + preroll);
        for (size_t k = 0; k < base.size(); ++k)
            base[k] *= envelope(src, (static_cast<double>(k) - static_cast<double>(preroll)) / fs);

        const double gain = 1.0 / src.distance;
        std::array<double, 2 * kHalfTaps> kernel{};
        for (int ch = 0; ch < 3; ++ch) {
            Vec3 mic = spec.geometry.mic(ch + 1);
            double cached_tau = -1.0;
            constexpr size_t kBlock = 16;  // delay refresh granularity for moving sources
            for (size_t t0 = 0; t0 < n; t0 += kBlock) {
                double tsec = static_cast<double>(t0) / fs;
                Vec3 pos = direction_to_point(direction_at(spec, src, tsec)).vec() * src.distance;
                double tau = (pos - mic).norm() / spec.speed_of_sound * fs;
                if (tau != cached_tau) {
                    make_kernel(tau - std::floor(tau), kernel);
                    cached_tau = tau;
                }
                long delay_int = static_cast<long>(std::floor(tau));
                size_t t1 = std::min(n, t0 + kBlock);
                for (size_t t = t0; t < t1; ++t) {
                    // read base at (t - tau), kernel tap j covers base[t - D - j]
                    long m0 = static_cast<long>(t) - delay_int + static_cast<long>(kHalfTaps) - 1 +
                              static_cast<long>(preroll);
                    double acc = 0.0;
                    for (size_t j = 0; j < 2 * kHalfTaps; ++j)
                        acc += base[static_cast<size_t>(m0 - static_cast<long>(j))] * kernel[j];
                    mix[static_cast<size_t>(ch)][t] += gain * acc;
                }
            }
        }
    }

    for (int ch = 0; ch < 3; ++ch) {
        auto& m = mix[static_cast<size_t>(ch)];
        auto& dst = out.channels[static_cast<size_t>(ch)];
        dst.resize(n);
        double sigma = 0.0;
        if (spec.snr_db) {
            double power = 0.0;
            for (double v : m) power += v * v;
            power /= std::max<size_t>(n, 1);
            sigma = power > 0.0 ? std::sqrt(power * std::pow(10.0, -*spec.snr_db / 10.0)) : 1.0;
        }
        auto rng = substream(spec.seed, 200 + static_cast<uint64_t>(ch));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (size_t t = 0; t < n; ++t) {
            double v = m[t];
            if (sigma > 0.0) v += sigma * gauss(rng);
            dst[t] = static_cast<float>(v);
        }
    }

    for (double t = 0.0; t < spec.duration_s; t += spec.truth_hop_s) {
        TruthRecord rec;
        rec.time_s = t;
        for (size_t c = 0; c < spec.sources.size(); ++c)
            if (in_intervals(spec.sources[c], t))
                rec.sources.push_back({static_cast<int>(c), direction_at(spec, spec.sources[c], t)});
        out.truth.records.push_back(std::move(rec));
    }
    return out;
}

double rmse_loc(const std::vector<HemispherePoint>& truth,
                const std::vector<HemispherePoint>& estimate) {
    if (truth.size() != estimate.size() || truth.empty())
        throw std::invalid_argument("rmse_loc: lists must be nonempty and of equal length");
    double acc = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
        double d = chord(truth[i], estimate[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(truth.size()));
}

std::vector<SweepRow> run_noise_sweep(const ArrayGeometry& g, const MappingLattice& lattice,
                                      const std::vector<double>& sigmas, size_t trials,
                                      uint64_t seed) {
    validate(g);
    for (double s : sigmas)
        if (!(s >= 0.0)) throw std::invalid_argument("run_noise_sweep: sigmas must be >= 0");
    FarFieldRadius r{};

    // hand-measurement error: 2 mm per coordinate
    ArrayGeometry miscal{g.b - 2e-3, g.c_x + 2e-3, g.c_y - 2e-3};

    // recalibrate once from a clean lat-long dataset, as the field procedure would
    FieldDataset ds;
    for (const auto& d : latlong_lattice(36)) {
        Vec3 src = direction_to_point(d).vec() * r.r;
        ds.records.push_back({d, tdoa_from_geometry(g, src), r.r});
    }
    ArrayGeometry calibrated = calibrate_geometry(ds, miscal, r).geometry;

    std::vector<SweepRow> rows;
    for (double sigma : sigmas) {
        auto rng = substream(seed, std::hash<double>{}(sigma));
        std::uniform_real_distribution<double> u_theta(-kPi, kPi);
        std::uniform_real_distribution<double> u_phi(0.0, kPi / 2.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        std::vector<HemispherePoint> truth, est_nns, est_cf, est_mis, est_cal;
        truth.reserve(trials);
        for (size_t i = 0; i < trials; ++i) {
            Direction dir{u_theta(rng), u_phi(rng)};
            HemispherePoint s = direction_to_point(dir);
            TdoaTriple q = tdoa_from_geometry(g, s.vec() * r.r);
            TdoaTriple qn{q.r12 + sigma * gauss(rng), q.r13 + sigma * gauss(rng),
                          q.r23 + sigma * gauss(rng)};
            truth.push_back(s);
            est_nns.push_back(direction_to_point(nns_lookup(lattice, qn).direction));
            est_cf.push_back(cf_map(qn.r12, qn.r13, g, r).point);
            est_mis.push_back(cf_map(qn.r12, qn.r13, miscal, r).point);
            est_cal.push_back(cf_map(qn.r12, qn.r13, calibrated, r).point);
        }
        rows.push_back({sigma, rmse_loc(truth, est_nns), rmse_loc(truth, est_cf),
                        rmse_loc(truth, est_mis), rmse_loc(truth, est_cal)});
    }
    return rows;
}

TrackingReport evaluate_tracking(const std::vector<TrackingFrame>& frames, const TruthLog& truth,
                                 double tol_deg) {
    TrackingReport report;
    if (frames.empty() || truth.records.empty()) return report;

    int max_source = -1;
    for (const auto& rec : truth.records)
        for (const auto& s : rec.sources) max_source = std::max(max_source, s.source);
    struct Acc {
        size_t truth_frames = 0, matched = 0, within = 0, az_within = 0;
        double angle_sum = 0.0;
    };
    std::vector<Acc> acc(static_cast<size_t>(max_source + 1));
    std::vector<bool> ever_detected;  // indexed by cluster id

    const double cap = 2.0 * tol_deg * kPi / 180.0;
    const double tol = tol_deg * kPi / 180.0;

    for (size_t f = 0; f < frames.size(); ++f) {
        const auto& frame = frames[f];
        double dt = f + 1 < frames.size() ? frames[f + 1].time_s - frame.time_s
                                          : (f > 0 ? frame.time_s - frames[f - 1].time_s : 0.0);
        report.duration_s += dt;

        // nearest truth record in time
        auto it = std::lower_bound(truth.records.begin(), truth.records.end(), frame.time_s,
                                   [](const TruthRecord& r, double t) { return r.time_s < t; });
        const TruthRecord* rec = nullptr;
        if (it != truth.records.end()) rec = &*it;
        if (it != truth.records.begin()) {
            const TruthRecord& prev = *(it - 1);
            if (!rec || std::abs(prev.time_s - frame.time_s) < std::abs(rec->time_s - frame.time_s))
                rec = &prev;
        }
        if (!rec) continue;

        std::vector<const ClusterSnapshot*> detected;
        for (const auto& c : frame.clusters)
            if (c.detected) {
                detected.push_back(&c);
                if (static_cast<size_t>(c.id) >= ever_detected.size())
                    ever_detected.resize(static_cast<size_t>(c.id) + 1, false);
                ever_detected[static_cast<size_t>(c.id)] = true;
            }
        for (const auto& s : rec->sources) ++acc[static_cast<size_t>(s.source)].truth_frames;

        // greedy matching by ascending great-circle angle
        struct Pair {
            double angle;
            size_t det;
            size_t src;
        };
        std::vector<Pair> pairs;
        for (size_t d = 0; d < detected.size(); ++d) {
            HemispherePoint dp = direction_to_point(detected[d]->direction);
            for (size_t s = 0; s < rec->sources.size(); ++s) {
                double a = angle_between(dp, direction_to_point(rec->sources[s].direction));
                if (a <= cap) pairs.push_back({a, d, s});
            }
        }
        std::sort(pairs.begin(), pairs.end(),
                  [](const Pair& a, const Pair& b) { return a.angle < b.angle; });
        std::vector<bool> det_used(detected.size(), false), src_used(rec->sources.size(), false);
        size_t matched_count = 0;
        for (const auto& p : pairs) {
            if (det_used[p.det] || src_used[p.src]) continue;
            det_used[p.det] = true;
            src_used[p.src] = true;
            ++matched_count;
            Acc& a = acc[static_cast<size_t>(rec->sources[p.src].source)];
            ++a.matched;
            a.angle_sum += p.angle;
            if (p.angle <= tol) ++a.within;
            double az = std::abs(
                wrap_angle(detected[p.det]->direction.theta - rec->sources[p.src].direction.theta));
            if (az <= tol) ++a.az_within;
        }
        if (matched_count < detected.size()) report.ghost_time_s += dt;
    }

    report.detected_count =
        static_cast<size_t>(std::count(ever_detected.begin(), ever_detected.end(), true));
    for (const auto& a : acc) {
        SourceReport sr;
        sr.matched_frames = a.matched;
        sr.coverage = a.truth_frames > 0
                          ? static_cast<double>(a.matched) / static_cast<double>(a.truth_frames)
                          : 0.0;
        sr.mean_angle_deg = a.matched > 0
                                ? (a.angle_sum / static_cast<double>(a.matched)) * 180.0 / kPi
                                : 0.0;
        sr.frac_within_tol =
            a.matched > 0 ? static_cast<double>(a.within) / static_cast<double>(a.matched) : 0.0;
        sr.frac_az_within_tol =
            a.matched > 0 ? static_cast<double>(a.az_within) / static_cast<double>(a.matched) : 0.0;
        report.per_source.push_back(sr);
    }
    return report;
}

}  // namespace tridoa
