#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rabi_darboux/errors.hpp"
#include "rabi_darboux/twolevel.hpp"

namespace rabi_darboux {

// ---------------------------------------------------------------------------
// Detuning delta1(t) = (2 / t) * integral_0^t f1(s) ds

using DetuningTrace = ScalarTrace;

// Composite Simpson on each grid interval split into `refinement` panels;
// delta1(0) = 2 f1(0) by continuity.
inline DetuningTrace detuning_trace(const DriveProfile& drive, const TimeGrid& grid, std::size_t refinement = 8) {
    detail::require(grid.t0() == 0.0, "detuning_trace: grid must start at t = 0");
    detail::require(refinement >= 8 && refinement % 2 == 0, "detuning_trace: refinement must be even and >= 8");
    const auto times = grid.samples();
    std::vector<double> delta(times.size());
    delta[0] = 2.0 * drive(0.0);
    double integral = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double a = times[k - 1];
        const double h = (times[k] - a) / static_cast<double>(refinement);
        double odd = 0.0, even = 0.0;
        for (std::size_t j = 1; j < refinement; ++j) (j % 2 ? odd : even) += drive(a + h * static_cast<double>(j));
        integral += h / 3.0 * (drive(a) + 4.0 * odd + 2.0 * even + drive(times[k]));
        delta[k] = 2.0 * integral / times[k];
    }
    return DetuningTrace(times, std::move(delta), "detuning");
}

// ---------------------------------------------------------------------------
// Fast / slow oscillation structure of a probability trace

struct FrequencyEstimate {
    // false is the flat-signal marker: no oscillation was found.
    bool oscillating = false;
    double fast = 0.0;
    double slow = 0.0;
    double fast_amplitude = 0.0;
    double slow_amplitude = 0.0;
};

namespace detail {

inline double parabolic_offset(double left, double mid, double right) noexcept {
    const double den = left - 2.0 * mid + right;
    if (den == 0.0) return 0.0;
    return std::clamp(0.5 * (left - right) / den, -0.5, 0.5);
}

inline std::vector<std::size_t> local_maxima(std::span<const double> y) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(i);
    return out;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Moving average over a window of width `width`, via a cumulative
// trapezoid integral. Defined on [t_front + width/2, t_back - width/2].
struct Smoothed {
    std::size_t first = 0;
    std::vector<double> values;
};

inline Smoothed moving_average(std::span<const double> t, std::span<const double> y, double width) {
    const std::size_t n = t.size();
    std::vector<double> cumulative(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) cumulative[i] = cumulative[i - 1] + 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    const auto at = [&](double x) {
        const double u = (x - t.front()) / dt;
        const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), n - 2);
        const double frac = u - static_cast<double>(i);
        return cumulative[i] + frac * (cumulative[i + 1] - cumulative[i]);
    };
    Smoothed out;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] - half < t.front() || t[i] + half > t.back()) continue;
        if (out.values.empty()) out.first = i;
        out.values.push_back((at(t[i] + half) - at(t[i] - half)) / width);
    }
    return out;
}

struct Lobes {
    std::vector<double> peak_times;
    std::vector<double> peak_values;
    std::vector<double> trough_values;
};

// One extremum per sign lobe of y (a detrended signal); lobes touching either
// end of the range are dropped since their extremum may be cut off.
inline Lobes sign_lobes(std::span<const double> t, std::span<const double> y) {
    Lobes out;
    std::size_t i = 0;
    const std::size_t n = y.size();
    while (i < n) {
        const bool positive = y[i] > 0.0;
        std::size_t j = i;
        std::size_t best = i;
        while (j < n && (y[j] > 0.0) == positive) {
            if (positive ? y[j] > y[best] : y[j] < y[best]) best = j;
            ++j;
        }
        if (i > 0 && j < n && best > 0 && best + 1 < n) {
            const double off = parabolic_offset(y[best - 1], y[best], y[best + 1]);
            const double dt = t[best + 1] - t[best];
            const double value = y[best] - 0.25 * (y[best - 1] - y[best + 1]) * off;
            if (positive) {
                out.peak_times.push_back(t[best] + off * dt);
                out.peak_values.push_back(value);
            } else {
                out.trough_values.push_back(value);
            }
        }
        i = j;
    }
    return out;
}

inline double mean_spacing(const std::vector<double>& times) {
    return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

// Zig-zag pivots: alternating extrema whose successive differences reach
// `threshold`. Pivots on the first or last sample are dropped.
struct Pivots {
    std::vector<double> maxima;
    std::vector<double> minima;
};

inline Pivots zigzag(std::span<const double> t, std::span<const double> y, double threshold) {
    Pivots out;
    const std::size_t n = y.size();
    const auto record = [&](std::size_t i, bool is_max) {
        if (i == 0 || i + 1 >= n) return;
        const double off = parabolic_offset(y[i - 1], y[i], y[i + 1]);
        (is_max ? out.maxima : out.minima).push_back(t[i] + off * (t[i + 1] - t[i]));
    };
    int dir = 0;
    std::size_t hi = 0, lo = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (dir == 0) {
            if (y[i] > y[hi]) hi = i;
            if (y[i] < y[lo]) lo = i;
            if (y[hi] - y[i] >= threshold) {
                record(hi, true);
                dir = -1;
                lo = i;
            } else if (y[i] - y[lo] >= threshold) {
                record(lo, false);
                dir = 1;
                hi = i;
            }
        } else if (dir > 0) {
            if (y[i] > y[hi]) {
                hi = i;
            } else if (y[hi] - y[i] >= threshold) {
                record(hi, true);
                dir = -1;
                lo = i;
            }
        } else {
            if (y[i] < y[lo]) {
                lo = i;
            } else if (y[i] - y[lo] >= threshold) {
                record(lo, false);
                dir = 1;
                hi = i;
            }
        }
    }
    return out;
}

inline double relative_spread(const std::vector<double>& times) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 1; i < times.size(); ++i) {
        lo = std::min(lo, times[i] - times[i - 1]);
        hi = std::max(hi, times[i] - times[i - 1]);
    }
    return (hi - lo) / mean_spacing(times);
}

inline void require_uniform(std::span<const double> t) {
    require(t.size() >= 5, "oscillation analysis: trace too short");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i)
        require(std::abs(t[i] - t[i - 1] - dt) <= 1e-6 * dt, "oscillation analysis: sampling must be uniform");
}

} // namespace detail

// Fast frequency from the mean spacing of the detrended signal's peaks (one
// per positive lobe); the trend is a moving average over one fast period. The
// slow frequency comes from the spacing of the trend's zig-zag pivots
// (threshold: half the trend range), using whichever pivot kind is more
// regular. Frequencies are angular (rad/time).
inline FrequencyEstimate oscillation_frequencies(const ScalarTrace& p_trace) {
    const auto t = p_trace.times();
    const auto p = p_trace.values();
    detail::require_uniform(t);

    double variation = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) variation += std::abs(p[i] - p[i - 1]);
    if (variation < 1e-6) return {};

    const auto raw = detail::local_maxima(p);
    if (raw.size() < 3) return {};
    std::vector<double> gaps;
    for (std::size_t i = 1; i < raw.size(); ++i) gaps.push_back(t[raw[i]] - t[raw[i - 1]]);
    double period = detail::median(gaps);

    detail::Smoothed trend;
    detail::Lobes lobes;
    for (int pass = 0; pass < 3; ++pass) {
        trend = detail::moving_average(t, p, period);
        if (trend.values.size() < 5) throw ValidationError("oscillation analysis: trace spans too few fast periods");
        std::vector<double> detrended(trend.values.size());
        for (std::size_t i = 0; i < detrended.size(); ++i) detrended[i] = p[trend.first + i] - trend.values[i];
        lobes = detail::sign_lobes(t.subspan(trend.first, detrended.size()), detrended);
        if (lobes.peak_times.size() < 2) return {};
        period = detail::mean_spacing(lobes.peak_times);
    }
    const double span = t.back() - t.front();
    if (span < 20.0 * period) throw ValidationError("oscillation analysis: trace spans fewer than 20 fast periods");

    FrequencyEstimate est;
    est.oscillating = true;
    est.fast = 2.0 * std::numbers::pi / period;
    double peak_mean = 0.0, trough_mean = 0.0;
    for (double v : lobes.peak_values) peak_mean += v;
    for (double v : lobes.trough_values) trough_mean += v;
    peak_mean /= static_cast<double>(lobes.peak_values.size());
    trough_mean = lobes.trough_values.empty() ? 0.0 : trough_mean / static_cast<double>(lobes.trough_values.size());
    est.fast_amplitude = 0.5 * (peak_mean - trough_mean);

    const auto [lo, hi] = std::minmax_element(trend.values.begin(), trend.values.end());
    const double range = *hi - *lo;
    est.slow_amplitude = 0.5 * range;
    if (range < 0.1 * est.fast_amplitude || range < 1e-9) return est;

    const auto pivots = detail::zigzag(t.subspan(trend.first, trend.values.size()), trend.values, 0.5 * range);
    const std::vector<double>* chosen = nullptr;
    for (const auto* kind : {&pivots.minima, &pivots.maxima}) {
        if (kind->size() < 2) continue;
        if (!chosen || kind->size() > chosen->size() ||
            (kind->size() == chosen->size() && detail::relative_spread(*kind) < detail::relative_spread(*chosen)))
            chosen = kind;
    }
    if (!chosen) return est;
    const double slow = 2.0 * std::numbers::pi / detail::mean_spacing(*chosen);
    if (slow < est.fast) est.slow = slow;
    return est;
}

// ---------------------------------------------------------------------------
// Envelope statistics

struct EnvelopeMinimum {
    // min P over the interval
    double plain_min = 0.0;
    // max over windows [s, s + window] inside the interval of min P on the window:
    // the highest level P stays above for a whole window
    double window_floor = 0.0;
};

struct Interval {
    double from;
    double to;
};

inline EnvelopeMinimum envelope_minimum(const ScalarTrace& p_trace, double window,
                                        std::optional<Interval> interval = std::nullopt) {
    const auto t = p_trace.times();
    const auto p = p_trace.values();
    detail::require(p_trace.size() >= 2, "envelope_minimum: trace too short");
    const Interval span = interval.value_or(Interval{t.front(), t.back()});
    detail::require(span.to > span.from, "envelope_minimum: empty interval");
    detail::require(window > 0.0 && window <= span.to - span.from, "envelope_minimum: window must fit the interval");

    const auto maxima = detail::local_maxima(p);
    if (maxima.size() >= 2) {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < maxima.size(); ++i) gaps.push_back(t[maxima[i]] - t[maxima[i - 1]]);
        if (window < detail::median(gaps)) throw ValidationError("envelope_minimum: window shorter than one fast period");
    }

    const auto begin = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), span.from) - t.begin());
    const auto end = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), span.to) - t.begin());
    detail::require(end > begin + 1, "envelope_minimum: interval holds fewer than two samples");

    EnvelopeMinimum out;
    out.plain_min = *std::min_element(p.begin() + static_cast<std::ptrdiff_t>(begin),
                                      p.begin() + static_cast<std::ptrdiff_t>(end));
    out.window_floor = -INFINITY;
    // Sliding-window minimum over windows [t_i, t_i + window], monotone deque.
    std::deque<std::size_t> q;
    std::size_t right = begin;
    for (std::size_t left = begin; left < end; ++left) {
        if (t[left] + window > t[end - 1] + 1e-12 * window) break;
        while (right < end && t[right] <= t[left] + window * (1.0 + 1e-12)) {
            while (!q.empty() && p[q.back()] >= p[right]) q.pop_back();
            q.push_back(right++);
        }
        while (q.front() < left) q.pop_front();
        out.window_floor = std::max(out.window_floor, p[q.front()]);
    }
    if (!std::isfinite(out.window_floor)) out.window_floor = out.plain_min;
    return out;
}

} // namespace rabi_darboux
