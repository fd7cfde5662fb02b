#include "fito/paths.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "fito/error.hpp"

namespace fito {

namespace {

constexpr double kAlignTol = 1e-9;

std::size_t aligned_count(double length, double step, const char* what) {
    const double ratio = length / step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > kAlignTol * std::max(1.0, std::abs(ratio))) {
        std::ostringstream msg;
        msg << what << " " << length << " is not a multiple of the grid step " << step;
        throw AlignmentError(msg.str());
    }
    if (rounded < 0) {
        throw DomainError(std::string(what) + " must be non-negative");
    }
    return static_cast<std::size_t>(rounded);
}

double interpolate(std::span<const double> v, double a, double step, double x) {
    const std::size_t n = v.size() - 1;
    if (n == 0) return v[0];
    double pos = (x - a) / step;
    if (pos <= 0.0) return v.front();
    if (pos >= static_cast<double>(n)) return v.back();
    const auto j = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(j);
    if (w == 0.0) return v[j];
    return v[j] + w * (v[j + 1] - v[j]);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(double horizon, std::size_t segments)
    : horizon_(horizon), segments_(segments), step_(0.0) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("grid horizon must be positive");
    }
    if (segments == 0) {
        throw DomainError("grid needs at least one segment");
    }
    step_ = horizon / static_cast<double>(segments);
}

double Grid::node(std::size_t j) const {
    if (j >= segments_) return j == segments_ ? 0.0 : step_ * static_cast<double>(j - segments_);
    return -horizon_ + step_ * static_cast<double>(j);
}

std::size_t Grid::steps_in(double length) const { return aligned_count(length, step_, "length"); }

std::size_t Grid::index_of(double x) const {
    if (x > kAlignTol * horizon_ || x < -horizon_ * (1.0 + kAlignTol)) {
        throw DomainError("point outside [-T,0]");
    }
    return aligned_count(x + horizon_, step_, "offset");
}

bool Grid::operator==(const Grid& other) const {
    return segments_ == other.segments_ && horizon_ == other.horizon_;
}

// ---------------------------------------------------------------------------
// SampledFunction

SampledFunction SampledFunction::from(double a, double b, std::size_t segments,
                                      const std::function<double(double)>& fn) {
    if (!(b > a)) throw DomainError("sampled function needs a < b");
    if (segments == 0) throw DomainError("sampled function needs at least one segment");
    SampledFunction f;
    f.a = a;
    f.step = (b - a) / static_cast<double>(segments);
    f.values.resize(segments + 1);
    for (std::size_t j = 0; j <= segments; ++j) {
        const double x = j == segments ? b : a + f.step * static_cast<double>(j);
        f.values[j] = fn(x);
    }
    return f;
}

double SampledFunction::node(std::size_t j) const {
    if (j == segments()) return b();
    return a + step * static_cast<double>(j);
}

double SampledFunction::operator()(double x) const { return interpolate(values, a, step, x); }

bool SampledFunction::same_grid(const SampledFunction& other) const {
    const double tol = kAlignTol * std::max(1.0, std::abs(step));
    return values.size() == other.values.size() && std::abs(a - other.a) <= tol &&
           std::abs(step - other.step) <= kAlignTol * std::abs(step);
}

SampledFunction SampledFunction::restrict_to(double a_sub, double b_sub) const {
    if (a_sub < a - kAlignTol * step || b_sub > b() + kAlignTol * step || !(b_sub > a_sub)) {
        throw DomainError("interval not contained in the sampling range");
    }
    const std::size_t i0 = aligned_count(a_sub - a, step, "interval start");
    const std::size_t i1 = aligned_count(b_sub - a, step, "interval end");
    SampledFunction r;
    r.a = node(i0);
    r.step = step;
    r.values.assign(values.begin() + static_cast<std::ptrdiff_t>(i0),
                    values.begin() + static_cast<std::ptrdiff_t>(i1) + 1);
    return r;
}

double SampledFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double SampledFunction::total_variation() const {
    double tv = 0.0;
    for (std::size_t j = 1; j < values.size(); ++j) tv += std::abs(values[j] - values[j - 1]);
    return tv;
}

// ---------------------------------------------------------------------------
// PathView

double PathView::node(std::size_t j) const {
    const std::size_t m = segments();
    if (j == m) return 0.0;
    return -horizon() + step * static_cast<double>(j);
}

double PathView::operator()(double x) const {
    if (x == 0.0) return present;
    return interpolate(past, -horizon(), step, x);
}

// ---------------------------------------------------------------------------
// SegmentedPath

SegmentedPath::SegmentedPath(Grid grid, std::vector<double> past, double present, ExtensionMode mode)
    : grid_(grid), past_(std::move(past)), present_(present), mode_(mode) {
    if (past_.size() != grid_.segments() + 1) {
        throw DomainError("path needs M+1 past samples");
    }
    if (!all_finite(past_) || !std::isfinite(present_)) {
        throw DomainError("path samples must be finite");
    }
}

SegmentedPath SegmentedPath::from_samples(const Grid& grid, std::vector<double> samples,
                                          ExtensionMode mode) {
    if (samples.empty()) throw DomainError("empty path");
    const double present = samples.back();
    return SegmentedPath(grid, std::move(samples), present, mode);
}

SegmentedPath SegmentedPath::from_parts(const Grid& grid, std::vector<double> past, double present,
                                        ExtensionMode mode) {
    return SegmentedPath(grid, std::move(past), present, mode);
}

SegmentedPath SegmentedPath::from_function(const Grid& grid, const std::function<double(double)>& fn,
                                           ExtensionMode mode) {
    std::vector<double> s(grid.segments() + 1);
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = fn(grid.node(j));
    return from_samples(grid, std::move(s), mode);
}

SegmentedPath SegmentedPath::constant(const Grid& grid, double value, ExtensionMode mode) {
    return from_samples(grid, std::vector<double>(grid.segments() + 1, value), mode);
}

SegmentedPath SegmentedPath::with_mode(ExtensionMode mode) const {
    return SegmentedPath(grid_, past_, present_, mode);
}

SampledFunction SegmentedPath::as_sampled() const {
    SampledFunction f;
    f.a = -grid_.horizon();
    f.step = grid_.step();
    f.values = past_;
    f.values.back() = present_;
    return f;
}

double SegmentedPath::sup_norm() const {
    double m = std::abs(present_);
    for (double v : past_) m = std::max(m, std::abs(v));
    return m;
}

void shift_past_samples(std::span<const double> past, std::size_t shift, ExtensionMode mode,
                        std::span<double> out) {
    const std::size_t n = past.size();
    const double fill = mode == ExtensionMode::zero ? 0.0 : past.front();
    const std::size_t head = std::min(shift, n);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(head), fill);
    for (std::size_t j = head; j < n; ++j) out[j] = past[j - shift];
}

SegmentedPath shift_past(const SegmentedPath& eta, double eps) {
    return shift_past(eta, eps, eta.extension_mode());
}

SegmentedPath shift_past(const SegmentedPath& eta, double eps, ExtensionMode mode) {
    const std::size_t k = aligned_count(eps, eta.grid().step(), "shift");
    std::vector<double> past(eta.past().size());
    shift_past_samples(eta.past(), k, mode, past);
    return SegmentedPath::from_parts(eta.grid(), std::move(past), eta.present(), eta.extension_mode());
}

SegmentedPath bump_present(const SegmentedPath& eta, double h) {
    return SegmentedPath::from_parts(eta.grid(), std::vector<double>(eta.past().begin(), eta.past().end()),
                                     eta.present() + h, eta.extension_mode());
}

// ---------------------------------------------------------------------------
// Extensions

double RealLineExtension::operator()(double x) const {
    const double a = base_.a;
    const double b = base_.b();
    if (x > b) return mode_ == Extension::J ? 0.0 : base_.values.back();
    if (x < a) return mode_ == Extension::J ? base_.values.front() : 0.0;
    return base_(x);
}

RealLineExtension extend(const SampledFunction& f, Extension mode) {
    if (f.values.empty()) throw DomainError("cannot extend an empty function");
    return RealLineExtension(f, mode);
}

// ---------------------------------------------------------------------------
// Trajectories

std::size_t TrajectoryView::step_index(double s) const {
    if (s < start - kAlignTol * step || s > end() + kAlignTol * step) {
        throw DomainError("time outside the simulated range");
    }
    return aligned_count(s - start, step, "time offset");
}

PathView TrajectoryView::window(std::size_t i) const {
    const auto m = window_segments;
    auto w = values.subspan(i, m + 1);
    return PathView{w, w.back(), step};
}

Trajectory::Trajectory(double start, double step, std::size_t window_segments,
                       std::vector<double> values, std::vector<double> noise)
    : start_(start), step_(step), window_segments_(window_segments), values_(std::move(values)),
      noise_(std::move(noise)) {
    if (values_.size() < window_segments_ + 1) {
        throw DomainError("trajectory shorter than one window");
    }
}

TrajectoryView Trajectory::view() const {
    return TrajectoryView{start_, step_, window_segments_, values_, noise_};
}

SegmentedPath window_at(const TrajectoryView& X, double s) {
    const std::size_t i = X.step_index(s);
    const PathView w = X.window(i);
    return SegmentedPath::from_samples(Grid(X.horizon(), X.window_segments),
                                       std::vector<double>(w.past.begin(), w.past.end()));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::pair<std::string, double>> read_rows(const std::filesystem::path& file,
                                                      std::string& header) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    if (!std::getline(in, header)) throw IoError("empty file " + file.string());
    std::vector<std::pair<std::string, double>> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw IoError(file.string() + ":" + std::to_string(lineno) + ": expected two columns");
        }
        try {
            rows.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw IoError(file.string() + ":" + std::to_string(lineno) + ": bad number");
        }
    }
    return rows;
}

double parse_x(const std::string& s, const std::filesystem::path& file) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw IoError(file.string() + ": bad abscissa '" + s + "'");
    }
}

}  // namespace

SegmentedPath read_path_csv(const std::filesystem::path& file) {
    std::string header;
    auto rows = read_rows(file, header);
    if (header.rfind("x,value", 0) != 0) throw IoError(file.string() + ": header must be x,value");

    std::optional<double> left_limit;
    std::vector<double> xs, vs;
    for (const auto& [xs_str, v] : rows) {
        if (xs_str == "0-") {
            left_limit = v;
            continue;
        }
        xs.push_back(parse_x(xs_str, file));
        vs.push_back(v);
    }
    if (xs.size() < 2) throw IoError(file.string() + ": need at least two rows");
    if (xs.back() != 0.0) throw IoError(file.string() + ": last row must be x = 0");
    const std::size_t m = xs.size() - 1;
    const double horizon = -xs.front();
    const Grid grid(horizon, m);
    for (std::size_t j = 0; j <= m; ++j) {
        if (std::abs(xs[j] - grid.node(j)) > 1e-7 * std::max(1.0, horizon)) {
            throw IoError(file.string() + ": rows are not on a uniform ascending grid");
        }
    }
    const double present = vs.back();
    std::vector<double> past = std::move(vs);
    if (left_limit) past.back() = *left_limit;
    return SegmentedPath::from_parts(grid, std::move(past), present);
}

void write_path_csv(const std::filesystem::path& file, const SegmentedPath& eta) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << std::setprecision(17) << "x,value\n";
    const auto& g = eta.grid();
    for (std::size_t j = 0; j < g.segments(); ++j) out << g.node(j) << ',' << eta.past()[j] << '\n';
    if (!eta.is_continuous()) out << "0-," << eta.left_limit() << '\n';
    out << 0 << ',' << eta.present() << '\n';
    if (!out) throw IoError("write failed for " + file.string());
}

SampledFunction read_curve_csv(const std::filesystem::path& file) {
    std::string header;
    auto rows = read_rows(file, header);
    if (rows.size() < 2) throw IoError(file.string() + ": need at least two rows");
    SampledFunction f;
    f.a = parse_x(rows.front().first, file);
    const double b = parse_x(rows.back().first, file);
    f.step = (b - f.a) / static_cast<double>(rows.size() - 1);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double x = parse_x(rows[j].first, file);
        if (std::abs(x - f.node(j)) > 1e-7 * std::max(1.0, std::abs(b - f.a))) {
            throw IoError(file.string() + ": curve is not uniformly spaced");
        }
        f.values.push_back(rows[j].second);
    }
    return f;
}

void write_curve_csv(const std::filesystem::path& file, const std::string& x_name,
                     std::span<const double> xs, std::span<const double> values) {
    if (xs.size() != values.size()) throw DomainError("curve abscissae and values differ in length");
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << std::setprecision(17) << x_name << ",value\n";
    for (std::size_t j = 0; j < xs.size(); ++j) out << xs[j] << ',' << values[j] << '\n';
    if (!out) throw IoError("write failed for " + file.string());
}

}  // namespace fito
