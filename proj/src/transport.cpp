#include "tracelab/transport.hpp"

#include "tracelab/error.hpp"
#include "tracelab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tracelab::transport {

namespace {

double wrap(double v, double period) {
    double r = v - period * std::floor(v / period);
    return r >= period ? 0.0 : r;
}

bool is_power_of_two(double t) {
    int e = 0;
    return std::frexp(t, &e) == 0.5;
}

std::string describe_time(double t) {
    std::ostringstream os;
    os.precision(17);
    os << t;
    return os.str();
}

}  // namespace

double slab_start(int k) { return std::ldexp(1.0, -k - 1); }
double slab_end(int k) { return std::ldexp(1.0, -k); }
double slab_duration(int k) { return std::ldexp(1.0, -k - 1); }

int slab_of(double t) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::time_out_of_range, "t = " + describe_time(t) + " not in (0, 1]");
    int e = 0;
    const double f = std::frexp(t, &e);
    return f == 0.5 ? 1 - e : -e;
}

int stripe_value(int level, double x) {
    const auto n = static_cast<long long>(std::floor(std::ldexp(x, level)));
    return (n & 1) == 0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

DyadicPattern::DyadicPattern(int level, int resolution, std::vector<std::int8_t> values)
    : level_(level),
      resolution_(resolution),
      columns_(std::size_t{2} << resolution),
      rows_(std::size_t{1} << resolution),
      values_(std::move(values)) {
    if (level < 0 || resolution < 0 || resolution > 14)
        throw Error(ErrorCode::level_mismatch, "level must be >= 0 and resolution in 0..14");
    if (values_.size() != columns_ * rows_) throw Error(ErrorCode::level_mismatch, "value count does not match grid");
    for (auto v : values_) {
        if (v != 1 && v != -1) throw Error(ErrorCode::level_mismatch, "pattern values must be +-1");
    }
}

DyadicPattern DyadicPattern::stripes(int level, int resolution) {
    if (resolution < level)
        throw Error(ErrorCode::level_mismatch, "grid resolution " + std::to_string(resolution) +
                                                   " cannot carry stripes of level " + std::to_string(level));
    const std::size_t cols = std::size_t{2} << resolution;
    const std::size_t rows = std::size_t{1} << resolution;
    const std::size_t width = std::size_t{1} << (resolution - level);
    std::vector<std::int8_t> v(cols * rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = ((c / width) & 1) == 0 ? 1 : -1;
    }
    return DyadicPattern(level, resolution, std::move(v));
}

double DyadicPattern::cell_size() const { return std::ldexp(1.0, -resolution_); }

std::int8_t DyadicPattern::value(const Vec& x) const {
    const double xm = wrap(x.x, kCellWidth);
    const double ym = wrap(x.y, kCellHeight);
    const auto c = std::min(columns_ - 1, static_cast<std::size_t>(std::ldexp(xm, resolution_)));
    const auto r = std::min(rows_ - 1, static_cast<std::size_t>(std::ldexp(ym, resolution_)));
    return at(c, r);
}

double DyadicPattern::mean(const std::function<double(double)>& beta) const {
    std::size_t plus = 0;
    for (auto v : values_) plus += v == 1 ? 1 : 0;
    const std::size_t minus = values_.size() - plus;
    // Two-valued patterns: the average is an exact weighted pair.
    return (static_cast<double>(plus) * beta(1.0) + static_cast<double>(minus) * beta(-1.0)) /
           static_cast<double>(values_.size());
}

DyadicPattern evolve_exact(const DyadicPattern& p, int k) {
    if (k < 0) throw Error(ErrorCode::level_mismatch, "slab index must be >= 0");
    if (p.level() != k + 1)
        throw Error(ErrorCode::level_mismatch, "slab " + std::to_string(k) + " expects a level " +
                                                   std::to_string(k + 1) + " pattern, got level " +
                                                   std::to_string(p.level()));
    if (p.resolution() < k + 1) throw Error(ErrorCode::level_mismatch, "grid too coarse for the blocks of this slab");
    const std::size_t h = std::size_t{1} << (p.resolution() - k - 1);
    const std::size_t cols = p.columns();
    const std::size_t rows = p.rows();
    std::vector<std::int8_t> out(p.values());
    parallel_for(rows, [&](std::size_t r) {
        const std::size_t r0 = r / (2 * h) * (2 * h);
        const std::size_t rr = r0 + (2 * h - 1) - (r - r0);
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t phase = (c + cols - h) % (4 * h);
            if (phase >= 2 * h) continue;
            const std::size_t c0 = c - phase;
            const std::size_t cc = c0 + (2 * h - 1) - phase;
            out[r * cols + c] = p.at(cc % cols, rr);
        }
    });
    return DyadicPattern(k, p.resolution(), std::move(out));
}

// ---------------------------------------------------------------------------
// Square vortices
// ---------------------------------------------------------------------------

std::optional<ContourCoords> contour_coords(int k, const Vec& x) {
    const double h = std::ldexp(1.0, -k - 1);
    const double xm = wrap(x.x, kCellWidth);
    const double ym = wrap(x.y, kCellHeight);
    const double local = wrap(xm - h, 4.0 * h);
    if (local > 2.0 * h) return std::nullopt;
    const double xi = local - h;
    const double cy = 2.0 * h * std::floor(ym / (2.0 * h)) + h;
    const double eta = ym - cy;
    const double m = std::max(std::abs(xi), std::abs(eta));
    const Vec center{x.x - xi, x.y - eta, 0.0};
    double sigma = 0.0;
    if (std::abs(xi) >= std::abs(eta)) {
        if (xi > 0.0) sigma = eta >= 0.0 ? eta : 8.0 * m + eta;
        else sigma = 4.0 * m - eta;
    } else {
        if (eta > 0.0) sigma = 2.0 * m - xi;
        else sigma = 6.0 * m + xi;
    }
    return ContourCoords{center, m, sigma};
}

Vec contour_point(const Vec& center, double m, double sigma) {
    if (m == 0.0) return center;
    const double s = wrap(sigma, 8.0 * m);
    Vec local;
    if (s < m) local = {m, s};
    else if (s < 3.0 * m) local = {2.0 * m - s, m};
    else if (s < 5.0 * m) local = {-m, 4.0 * m - s};
    else if (s < 7.0 * m) local = {s - 6.0 * m, -m};
    else local = {m, s - 8.0 * m};
    return center + local;
}

Vec contour_tangent(double m, double sigma) {
    if (m == 0.0) return {};
    const double s = wrap(sigma, 8.0 * m);
    if (s < m || s >= 7.0 * m) return {0.0, 1.0};
    if (s < 3.0 * m) return {-1.0, 0.0};
    if (s < 5.0 * m) return {0.0, -1.0};
    return {1.0, 0.0};
}

Vec slab_field_eval(int k, const Vec& x, double t, Turn turn) {
    if (k < 0 || !(t > slab_start(k) && t <= slab_end(k)))
        throw Error(ErrorCode::outside_slab, "t = " + describe_time(t) + " is not in slab " + std::to_string(k));
    const auto cc = contour_coords(k, x);
    if (!cc) return {};
    const double speed = (turn == Turn::half ? 4.0 : 2.0) * cc->m / slab_duration(k);
    return speed * contour_tangent(cc->m, cc->sigma);
}

Vec cascade_field_eval(const Vec& x, double t) { return slab_field_eval(slab_of(t), x, t); }

std::string_view to_string(Solution w) { return w == Solution::trivial_zero ? "trivial-zero" : "depauw-cascade"; }

std::optional<Solution> solution_from_string(std::string_view name) {
    if (name == "trivial-zero") return Solution::trivial_zero;
    if (name == "depauw-cascade") return Solution::depauw_cascade;
    return std::nullopt;
}

double solution_eval(Solution w, const Vec& x, double t) {
    const int k = slab_of(t);
    if (w == Solution::trivial_zero) return 0.0;
    const double s = (t - slab_start(k)) / slab_duration(k);
    const auto cc = contour_coords(k, x);
    if (!cc) return stripe_value(k + 1, x.x);
    const Vec back = contour_point(cc->center, cc->m, cc->sigma - 4.0 * cc->m * s);
    return stripe_value(k + 1, back.x);
}

Vec lift_field_eval(const Vec& x) {
    if (!(x.z > 0.0)) throw Error(ErrorCode::outside_domain, "lift field needs r > 0");
    if (x.z >= 1.0) return {0.0, 0.0, 1.0};
    const Vec b = cascade_field_eval({x.x, x.y, 0.0}, x.z);
    return {b.x, b.y, 1.0};
}

double lifted_solution_eval(const Vec& x, double t) {
    if (!(x.z > 0.0)) throw Error(ErrorCode::outside_domain, "lifted solution needs r > 0");
    if (x.z >= std::min(t, 1.0)) return 0.0;
    return solution_eval(Solution::depauw_cascade, {x.x, x.y, 0.0}, x.z);
}

// ---------------------------------------------------------------------------
// Weak formulation
// ---------------------------------------------------------------------------

WeakResidual weak_residual(Solution w, const SpaceTimeTestFunction& phi, int level, double t_cut) {
    if (level < 1 || level > 12) throw Error(ErrorCode::bad_config, "residual level must be in 1..12");
    const double step = std::ldexp(1.0, -level);
    const double first = std::ldexp(t_cut, level);
    if (!(t_cut >= 0.0 && t_cut < 1.0) || first != std::floor(first))
        throw Error(ErrorCode::time_out_of_range, "t_cut must be a multiple of 2^-level in [0, 1)");
    const auto n = std::size_t{1} << level;
    const std::size_t j0 = static_cast<std::size_t>(first);
    const std::size_t nt = n - j0;
    const std::size_t nx = 2 * n;
    std::vector<double> slices(nt, 0.0);
    std::vector<std::size_t> evals(nt, 0);
    parallel_for(nt, [&](std::size_t jj) {
        const double t = (static_cast<double>(j0 + jj) + 0.5) * step;
        std::vector<double> row(n, 0.0);
        std::size_t ev = 0;
        for (std::size_t iy = 0; iy < n; ++iy) {
            const double y = (static_cast<double>(iy) + 0.5) * step;
            double acc = 0.0;
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const Vec x{(static_cast<double>(ix) + 0.5) * step, y, 0.0};
                const Vec g = phi.gradient(x, t);
                const double dt = phi.time_derivative(x, t);
                if (g == Vec{} && dt == 0.0) continue;
                const double wv = solution_eval(w, x, t);
                ++ev;
                if (wv == 0.0) continue;
                acc += wv * (dt + dot(cascade_field_eval(x, t), g));
            }
            row[iy] = acc;
        }
        slices[jj] = pairwise_sum(row);
        evals[jj] = ev;
    });
    WeakResidual r;
    r.level = level;
    r.t_cut = t_cut;
    r.value = std::abs(pairwise_sum(slices) * step * step * step);
    for (auto e : evals) r.evaluations += e;
    return r;
}

WeakResidual lift_residual(const TestFunction& phi, int level) {
    if (level < 1 || level > 10) throw Error(ErrorCode::bad_config, "lift residual level must be in 1..10");
    const double step = std::ldexp(1.0, -level);
    const auto n = std::size_t{1} << level;
    const std::size_t nx = 2 * n;
    std::vector<double> slices(n, 0.0);
    std::vector<std::size_t> evals(n, 0);
    parallel_for(n, [&](std::size_t jr) {
        const double r = (static_cast<double>(jr) + 0.5) * step;
        const double c = (1.0 - r) * (1.0 - r);
        const double tail = (1.0 - r) * c / 3.0;
        std::vector<double> row(n, 0.0);
        std::size_t ev = 0;
        for (std::size_t iy = 0; iy < n; ++iy) {
            const double y = (static_cast<double>(iy) + 0.5) * step;
            double acc = 0.0;
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const Vec x{(static_cast<double>(ix) + 0.5) * step, y, r};
                const double v = phi.value(x);
                const Vec g = phi.gradient(x);
                if (v == 0.0 && g == Vec{}) continue;
                const double wv = lifted_solution_eval(x, 1.0);
                ++ev;
                acc += wv * (-c * v + dot(lift_field_eval(x), g) * tail);
            }
            row[iy] = acc;
        }
        slices[jr] = pairwise_sum(row);
        evals[jr] = ev;
    });
    WeakResidual out;
    out.level = level;
    out.value = pairwise_sum(slices) * step * step * step;
    for (auto e : evals) out.evaluations += e;
    return out;
}

double cell_mean(Solution w, double t, const std::function<double(double)>& beta, int resolution) {
    const int k = slab_of(t);
    if (w == Solution::trivial_zero) return beta(0.0);
    if (is_power_of_two(t)) return DyadicPattern::stripes(k, k).mean(beta);
    const double step = std::ldexp(1.0, -resolution);
    const auto n = std::size_t{1} << resolution;
    std::vector<double> rows(n);
    parallel_for(n, [&](std::size_t iy) {
        std::vector<double> row(2 * n);
        for (std::size_t ix = 0; ix < 2 * n; ++ix) {
            const Vec x{(static_cast<double>(ix) + 0.5) * step, (static_cast<double>(iy) + 0.5) * step, 0.0};
            row[ix] = beta(solution_eval(w, x, t));
        }
        rows[iy] = pairwise_sum(row);
    });
    return pairwise_sum(rows) / static_cast<double>(2 * n * n);
}

DefectReport renormalization_defect(Solution w, const std::function<double(double)>& beta,
                                    const std::vector<double>& times, int resolution) {
    if (times.empty()) throw Error(ErrorCode::too_few_samples, "renormalization defect needs at least one time");
    DefectReport rep;
    rep.times = times;
    rep.initial_value = beta(0.0);
    for (double t : times) rep.values.push_back(cell_mean(w, t, beta, resolution));
    const auto smallest = std::min_element(times.begin(), times.end()) - times.begin();
    rep.jump = std::abs(rep.values[static_cast<std::size_t>(smallest)] - rep.initial_value);
    return rep;
}

double tv_density(int k, int n) {
    const double h = std::ldexp(1.0, -k - 1);
    const double t = slab_end(k);
    const std::size_t nx = 2 * static_cast<std::size_t>(n);
    const std::size_t ny = static_cast<std::size_t>(n);
    const double dx = 4.0 * h / static_cast<double>(nx);
    const double dy = 2.0 * h / static_cast<double>(ny);
    std::vector<Vec> b(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Vec x{(static_cast<double>(i) + 0.5) * dx, (static_cast<double>(j) + 0.5) * dy, 0.0};
            b[j * nx + i] = slab_field_eval(k, x, t);
        }
    }
    std::vector<double> terms;
    terms.reserve(2 * nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Vec& c = b[j * nx + i];
            terms.push_back(norm(b[j * nx + (i + 1) % nx] - c) * dy);
            terms.push_back(norm(b[((j + 1) % ny) * nx + i] - c) * dx);
        }
    }
    return pairwise_sum(terms) / (8.0 * h * h);
}

}  // namespace tracelab::transport
