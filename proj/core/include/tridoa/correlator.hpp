// Frame segmentation and frame-level TDOA measurement.
//
// TDOAs are measured per microphone pair with a partially whitened
// cross-power-spectrum-phase weighting followed by quadratic interpolation of
// the correlation peak. Lag sign convention: a positive peak lag means channel
// i's signal arrives later than channel j's, so peak_lag * c / fs equals the
// geometric r_ij of geometry.hpp.
#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "tridoa/geometry.hpp"

namespace tridoa {

/// One frame of one channel.
struct Frame {
    std::span<const float> samples;
    size_t index = 0;  // frame counter k
    int channel = 1;   // microphone index, 1-based
};

/// Time-aligned frames of the three channels.
struct FrameTriple {
    size_t index = 0;
    std::array<std::span<const float>, 3> ch;
};

/// Splits three equal-length channels into frames of `frame_len` advancing by
/// frame_len/2 (50% overlap). The trailing partial frame is dropped.
std::vector<FrameTriple> segment_stream(std::span<const float> ch1, std::span<const float> ch2,
                                        std::span<const float> ch3, size_t frame_len);

/// Weighted cross-correlation restricted to the plausible lag range.
struct CorrelationFunction {
    int max_lag = 0;
    std::vector<double> values;  // values[i] is R(i - max_lag)
    int peak_lag = 0;

    double at(int lag) const { return values[static_cast<size_t>(lag + max_lag)]; }
    double peak_value() const { return at(peak_lag); }
    int lag_count() const { return 2 * max_lag + 1; }
};

/// Spectral weighting W(f) = 1 / (|S(f)|^gamma + floor_eps * mean|S|).
/// gamma = 1 is classic cross-power spectrum phase; < 1 whitens partially.
struct McpspWeighting {
    double gamma = 0.75;
    double floor_eps = 1e-9;
};

enum class WindowKind { kHann, kRect };

/// Sub-sample peak refinement by a parabola through the peak and neighbors.
/// The offset is clamped to [-1/2, 1/2]; a peak at the range edge (or a
/// degenerate parabola) falls back to the integer peak lag.
double refine_peak_qi(const CorrelationFunction& corr);

struct PairMeasurement {
    int mic_i = 1, mic_j = 2;
    double refined_lag = 0.0;  // fractional samples
    double tdoa = 0.0;         // meters
    double peak_value = 0.0;
    CorrelationFunction corr;
};

struct TdoaMeasurement {
    size_t frame_index = 0;
    TdoaTriple tdoa;
    std::array<PairMeasurement, 3> pairs;  // order (1,2), (1,3), (2,3)
};

/// Plausible lag bound for a pair: ceil(d * fs / c) + 1 (one bin of slack).
int plausible_max_lag(double pair_distance_m, double sample_rate, double speed_of_sound);

/// Reusable correlation workspace (FFT plans, window table) for one frame
/// length. Not safe for concurrent use by multiple threads.
class CorrelatorEngine {
public:
    explicit CorrelatorEngine(size_t frame_len, McpspWeighting weighting = {},
                              WindowKind window = WindowKind::kHann);
    ~CorrelatorEngine();
    CorrelatorEngine(const CorrelatorEngine&) = delete;
    CorrelatorEngine& operator=(const CorrelatorEngine&) = delete;
    CorrelatorEngine(CorrelatorEngine&&) noexcept;
    CorrelatorEngine& operator=(CorrelatorEngine&&) noexcept;

    size_t frame_len() const;

    /// Weighted cross-correlation of two frames over lags [-max_lag, max_lag].
    /// A coherent pure delay peaks at ~1; two all-zero frames give an all-zero
    /// function with peak_lag = 0.
    CorrelationFunction cross_correlate(std::span<const float> a, std::span<const float> b,
                                        int max_lag);
    CorrelationFunction cross_correlate(const Frame& a, const Frame& b, int max_lag) {
        return cross_correlate(a.samples, b.samples, max_lag);
    }

    /// Measures all three pair TDOAs of one frame triple.
    TdoaMeasurement measure_frame(const FrameTriple& frames, const ArrayGeometry& g,
                                  double sample_rate, double speed_of_sound);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around CorrelatorEngine.
CorrelationFunction cross_correlate(const Frame& a, const Frame& b, int max_lag,
                                    McpspWeighting weighting = {},
                                    WindowKind window = WindowKind::kHann);

}  // namespace tridoa
