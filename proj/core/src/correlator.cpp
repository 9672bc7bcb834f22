#include "tridoa/correlator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace tridoa {

std::vector<FrameTriple> segment_stream(std::span<const float> ch1, std::span<const float> ch2,
                                        std::span<const float> ch3, size_t frame_len) {
    if (ch1.size() != ch2.size() || ch1.size() != ch3.size())
        throw std::invalid_argument("segment_stream: channel length mismatch");
    if (frame_len == 0 || frame_len % 2 != 0)
        throw std::invalid_argument("segment_stream: frame length must be even and nonzero");

    std::vector<FrameTriple> out;
    if (ch1.size() < frame_len) return out;
    size_t hop = frame_len / 2;
    size_t count = (ch1.size() - frame_len) / hop + 1;
    out.reserve(count);
    for (size_t k = 0; k < count; ++k) {
        size_t start = k * hop;
        out.push_back({k,
                       {ch1.subspan(start, frame_len), ch2.subspan(start, frame_len),
                        ch3.subspan(start, frame_len)}});
    }
    return out;
}

double refine_peak_qi(const CorrelationFunction& corr) {
    int lag = corr.peak_lag;
    if (lag <= -corr.max_lag || lag >= corr.max_lag) return static_cast<double>(lag);
    double left = corr.at(lag - 1);
    double mid = corr.at(lag);
    double right = corr.at(lag + 1);
    double denom = left - 2.0 * mid + right;
    if (std::abs(denom) < 1e-12) return static_cast<double>(lag);
    double delta = 0.5 * (left - right) / denom;
    delta = std::clamp(delta, -0.5, 0.5);
    return static_cast<double>(lag) + delta;
}

int plausible_max_lag(double pair_distance_m, double sample_rate, double speed_of_sound) {
    if (!(pair_distance_m > 0.0) || !(sample_rate > 0.0) || !(speed_of_sound > 0.0))
        throw std::invalid_argument("plausible_max_lag: arguments must be positive");
    return static_cast<int>(std::ceil(pair_distance_m * sample_rate / speed_of_sound)) + 1;
}

struct CorrelatorEngine::Impl {
    size_t frame_len;
    size_t fft_len;    // 2 * frame_len, zero-padded to avoid circular wraparound
    size_t spec_len;   // fft_len / 2 + 1
    McpspWeighting weighting;
    WindowKind window;
    std::vector<double> window_table;

    double* real_buf = nullptr;
    fftw_complex* spec_buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    std::vector<std::complex<double>> spec[3];      // per-channel spectra
    std::vector<std::complex<double>> scratch_spec; // cross_correlate inputs

    Impl(size_t len, McpspWeighting w, WindowKind win)
        : frame_len(len), fft_len(2 * len), spec_len(len + 1), weighting(w), window(win) {
        if (len < 2) throw std::invalid_argument("correlator: frame length must be >= 2");
        window_table.resize(frame_len);
        for (size_t n = 0; n < frame_len; ++n) {
            window_table[n] = (window == WindowKind::kHann)
                                  ? 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                                         static_cast<double>(frame_len - 1))
                                  : 1.0;
        }
        real_buf = fftw_alloc_real(fft_len);
        spec_buf = fftw_alloc_complex(spec_len);
        if (!real_buf || !spec_buf) throw std::bad_alloc();
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(fft_len), real_buf, spec_buf, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(fft_len), spec_buf, real_buf, FFTW_ESTIMATE);
        for (auto& s : spec) s.resize(spec_len);
        scratch_spec.resize(2 * spec_len);
    }

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (real_buf) fftw_free(real_buf);
        if (spec_buf) fftw_free(spec_buf);
    }

    void forward(std::span<const float> x, std::complex<double>* out) {
        for (size_t n = 0; n < frame_len; ++n)
            real_buf[n] = static_cast<double>(x[n]) * window_table[n];
        std::fill(real_buf + frame_len, real_buf + fft_len, 0.0);
        fftw_execute(fwd);
        for (size_t k = 0; k < spec_len; ++k) out[k] = {spec_buf[k][0], spec_buf[k][1]};
    }

    CorrelationFunction correlate_spectra(const std::complex<double>* a,
                                          const std::complex<double>* b, int max_lag) {
        CorrelationFunction corr;
        corr.max_lag = max_lag;
        corr.values.assign(static_cast<size_t>(2 * max_lag + 1), 0.0);
        corr.peak_lag = 0;

        // cross-power spectrum S = A * conj(B) and its mean magnitude
        double mean_mag = 0.0;
        for (size_t k = 0; k < spec_len; ++k) {
            std::complex<double> s = a[k] * std::conj(b[k]);
            spec_buf[k][0] = s.real();
            spec_buf[k][1] = s.imag();
            mean_mag += std::abs(s);
        }
        mean_mag /= static_cast<double>(spec_len);
        if (mean_mag <= 0.0) return corr;  // silence: gated downstream

        // mCPSP weighting; track the full-spectrum sum of weighted magnitudes
        // so a perfectly coherent delay normalizes to a peak of 1
        double floor_term = weighting.floor_eps * mean_mag;
        double mag_sum = 0.0;
        for (size_t k = 0; k < spec_len; ++k) {
            std::complex<double> s{spec_buf[k][0], spec_buf[k][1]};
            double mag = std::abs(s);
            double w = 1.0 / (std::pow(mag, weighting.gamma) + floor_term);
            s *= w;
            spec_buf[k][0] = s.real();
            spec_buf[k][1] = s.imag();
            double wm = mag * w;
            mag_sum += (k == 0 || k == spec_len - 1) ? wm : 2.0 * wm;
        }
        if (mag_sum <= 0.0) return corr;

        fftw_execute(inv);  // unnormalized inverse; real_buf[n] = sum over all bins

        for (int lag = -max_lag; lag <= max_lag; ++lag) {
            size_t idx = static_cast<size_t>((lag + static_cast<int>(fft_len)) %
                                             static_cast<int>(fft_len));
            corr.values[static_cast<size_t>(lag + max_lag)] = real_buf[idx] / mag_sum;
        }
        corr.peak_lag = -max_lag;
        for (int lag = -max_lag + 1; lag <= max_lag; ++lag)
            if (corr.at(lag) > corr.peak_value()) corr.peak_lag = lag;
        bool all_zero = std::all_of(corr.values.begin(), corr.values.end(),
                                    [](double v) { return v == 0.0; });
        if (all_zero) corr.peak_lag = 0;
        return corr;
    }
};

CorrelatorEngine::CorrelatorEngine(size_t frame_len, McpspWeighting weighting, WindowKind window)
    : impl_(std::make_unique<Impl>(frame_len, weighting, window)) {}

CorrelatorEngine::~CorrelatorEngine() = default;
CorrelatorEngine::CorrelatorEngine(CorrelatorEngine&&) noexcept = default;
CorrelatorEngine& CorrelatorEngine::operator=(CorrelatorEngine&&) noexcept = default;

size_t CorrelatorEngine::frame_len() const { return impl_->frame_len; }

CorrelationFunction CorrelatorEngine::cross_correlate(std::span<const float> a,
                                                      std::span<const float> b, int max_lag) {
    if (a.size() != impl_->frame_len || b.size() != impl_->frame_len)
        throw std::invalid_argument("cross_correlate: frame length mismatch");
    if (max_lag < 0 || static_cast<size_t>(max_lag) >= impl_->frame_len / 2)
        throw std::invalid_argument("cross_correlate: max_lag must be in [0, L/2)");
    std::complex<double>* sa = impl_->scratch_spec.data();
    std::complex<double>* sb = sa + impl_->spec_len;
    impl_->forward(a, sa);
    impl_->forward(b, sb);
    return impl_->correlate_spectra(sa, sb, max_lag);
}

TdoaMeasurement CorrelatorEngine::measure_frame(const FrameTriple& frames, const ArrayGeometry& g,
                                                double sample_rate, double speed_of_sound) {
    validate(g);
    for (const auto& ch : frames.ch)
        if (ch.size() != impl_->frame_len)
            throw std::invalid_argument("measure_frame: frame length mismatch");

    for (int c = 0; c < 3; ++c) impl_->forward(frames.ch[static_cast<size_t>(c)],
                                               impl_->spec[c].data());

    static constexpr int kPairMics[3][2] = {{1, 2}, {1, 3}, {2, 3}};
    TdoaMeasurement m;
    m.frame_index = frames.index;
    for (int p = 0; p < 3; ++p) {
        int i = kPairMics[p][0], j = kPairMics[p][1];
        int max_lag = plausible_max_lag(g.pair_distance(p), sample_rate, speed_of_sound);
        PairMeasurement& pm = m.pairs[static_cast<size_t>(p)];
        pm.mic_i = i;
        pm.mic_j = j;
        pm.corr = impl_->correlate_spectra(impl_->spec[i - 1].data(), impl_->spec[j - 1].data(),
                                           max_lag);
        pm.refined_lag = refine_peak_qi(pm.corr);
        pm.peak_value = pm.corr.peak_value();
        pm.tdoa = pm.refined_lag * speed_of_sound / sample_rate;
        m.tdoa[p] = pm.tdoa;
    }
    return m;
}

CorrelationFunction cross_correlate(const Frame& a, const Frame& b, int max_lag,
                                    McpspWeighting weighting, WindowKind window) {
    if (a.samples.size() != b.samples.size())
        throw std::invalid_argument("cross_correlate: frame length mismatch");
    CorrelatorEngine engine(a.samples.size(), weighting, window);
    return engine.cross_correlate(a.samples, b.samples, max_lag);
}

}  // namespace tridoa
