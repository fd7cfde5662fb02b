#pragma once

// Grids and discrete path representations.
//
// A path on [-T,0] is stored on the uniform grid x_j = -T + j*step, j = 0..M.
// SegmentedPath keeps the value at 0 (the "present") apart from the samples of
// the past on [-T,0[, whose last entry is the left limit at 0-. Continuous
// paths have present == left limit.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fito {

class Grid {
public:
    Grid(double horizon, std::size_t segments);

    double horizon() const { return horizon_; }
    std::size_t segments() const { return segments_; }
    double step() const { return step_; }

    // x_j = -T + j*step; x_M is exactly 0.
    double node(std::size_t j) const;

    // Number of grid steps represented by a length; throws AlignmentError when
    // the length is not an integer multiple of the step.
    std::size_t steps_in(double length) const;

    // Index of a node of [-T,0]; AlignmentError off-grid, DomainError outside.
    std::size_t index_of(double x) const;

    bool operator==(const Grid& other) const;

private:
    double horizon_;
    std::size_t segments_;
    double step_;
};

// Samples of a real function at a + j*step, j = 0..n.
struct SampledFunction {
    double a = 0.0;
    double step = 1.0;
    std::vector<double> values;

    static SampledFunction from(double a, double b, std::size_t segments,
                                const std::function<double(double)>& fn);

    std::size_t segments() const { return values.empty() ? 0 : values.size() - 1; }
    double b() const { return a + step * static_cast<double>(segments()); }
    double node(std::size_t j) const;

    // Linear interpolation; clamps to the end values outside [a,b].
    double operator()(double x) const;

    bool same_grid(const SampledFunction& other) const;

    // Restriction to the nodes between a_sub and b_sub (both must be nodes).
    SampledFunction restrict_to(double a_sub, double b_sub) const;

    double sup_norm() const;
    double total_variation() const;
};

enum class ExtensionMode { zero, constant_left };

// Non-owning view of a path in the (past, present) representation.
struct PathView {
    std::span<const double> past;  // M+1 samples, past[M] is the left limit at 0-
    double present = 0.0;
    double step = 1.0;

    std::size_t segments() const { return past.size() - 1; }
    double horizon() const { return step * static_cast<double>(segments()); }
    double node(std::size_t j) const;
    double left_limit() const { return past.back(); }

    // eta(x): the present at x == 0, linear interpolation of the past otherwise.
    double operator()(double x) const;
};

class SegmentedPath {
public:
    // Continuous path from M+1 samples; the present is the last sample.
    static SegmentedPath from_samples(const Grid& grid, std::vector<double> samples,
                                      ExtensionMode mode = ExtensionMode::constant_left);
    // Path with an explicit jump at 0: past holds M+1 samples (last = 0-).
    static SegmentedPath from_parts(const Grid& grid, std::vector<double> past, double present,
                                    ExtensionMode mode = ExtensionMode::constant_left);
    static SegmentedPath from_function(const Grid& grid, const std::function<double(double)>& fn,
                                       ExtensionMode mode = ExtensionMode::constant_left);
    static SegmentedPath constant(const Grid& grid, double value,
                                  ExtensionMode mode = ExtensionMode::constant_left);

    const Grid& grid() const { return grid_; }
    std::span<const double> past() const { return past_; }
    double present() const { return present_; }
    double left_limit() const { return past_.back(); }
    ExtensionMode extension_mode() const { return mode_; }
    bool is_continuous() const { return past_.back() == present_; }

    PathView view() const { return PathView{past_, present_, grid_.step()}; }
    double operator()(double x) const { return view()(x); }

    SegmentedPath with_mode(ExtensionMode mode) const;

    // The path as a function on [-T,0] sampled on the grid (node 0 carries the present).
    SampledFunction as_sampled() const;

    // sup over [-T,0] of |eta| including the present.
    double sup_norm() const;

private:
    SegmentedPath(Grid grid, std::vector<double> past, double present, ExtensionMode mode);

    Grid grid_;
    std::vector<double> past_;
    double present_;
    ExtensionMode mode_;
};

// past'(x) = past(x - eps); below -T the value follows the extension mode.
SegmentedPath shift_past(const SegmentedPath& eta, double eps);
SegmentedPath shift_past(const SegmentedPath& eta, double eps, ExtensionMode mode);
// Index form used by the derivative kernels; writes M+1 samples into out.
void shift_past_samples(std::span<const double> past, std::size_t shift, ExtensionMode mode,
                        std::span<double> out);

SegmentedPath bump_present(const SegmentedPath& eta, double h);

// Real-line extensions of a function sampled on [a,b].
//   J:    0 right of b, f(a) left of a.
//   Jbar: f(b) right of b, 0 left of a.
enum class Extension { J, Jbar };

class RealLineExtension {
public:
    RealLineExtension(SampledFunction base, Extension mode) : base_(std::move(base)), mode_(mode) {}

    double operator()(double x) const;
    const SampledFunction& base() const { return base_; }
    Extension mode() const { return mode_; }

private:
    SampledFunction base_;
    Extension mode_;
};

RealLineExtension extend(const SampledFunction& f, Extension mode);

// Non-owning view of a simulated path on [start - T, end] with node spacing = grid step.
struct TrajectoryView {
    double start = 0.0;  // initial time t
    double step = 1.0;   // node spacing, equal to the window grid step
    std::size_t window_segments = 0;  // M
    std::span<const double> values;   // samples at start - T + k*step
    std::span<const double> noise;    // Brownian increments per step (may be empty)

    double horizon() const { return step * static_cast<double>(window_segments); }
    std::size_t steps() const { return values.size() - window_segments - 1; }
    double end() const { return start + step * static_cast<double>(steps()); }
    // Time of the i-th step node (i = 0 is the start).
    double time_at_step(std::size_t i) const { return start + step * static_cast<double>(i); }
    // Sample at step node i (value X_{start + i*step}).
    double at_step(std::size_t i) const { return values[window_segments + i]; }
    // Step index of a grid time s in [start, end].
    std::size_t step_index(double s) const;
    // The window (X_{s+x})_{x in [-T,0]} at step node i, as a continuous path.
    PathView window(std::size_t i) const;
};

class Trajectory {
public:
    Trajectory(double start, double step, std::size_t window_segments, std::vector<double> values,
               std::vector<double> noise = {});

    TrajectoryView view() const;
    operator TrajectoryView() const { return view(); }

    std::span<const double> values() const { return values_; }
    std::span<const double> noise() const { return noise_; }
    double start() const { return start_; }
    double step() const { return step_; }
    std::size_t window_segments() const { return window_segments_; }

private:
    double start_;
    double step_;
    std::size_t window_segments_;
    std::vector<double> values_;
    std::vector<double> noise_;
};

// Window of X at grid time s, copied into a continuous SegmentedPath.
SegmentedPath window_at(const TrajectoryView& X, double s);

// CSV "x,value" path format. The last row has x = 0 and holds the present; an
// optional row "0-,value" supplies a distinct left limit.
SegmentedPath read_path_csv(const std::filesystem::path& file);
void write_path_csv(const std::filesystem::path& file, const SegmentedPath& eta);

// Two-column uniform-spacing curve with any header (e.g. "s,value").
SampledFunction read_curve_csv(const std::filesystem::path& file);
void write_curve_csv(const std::filesystem::path& file, const std::string& x_name,
                     std::span<const double> xs, std::span<const double> values);

}  // namespace fito
