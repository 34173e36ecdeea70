#pragma once

#include "tracelab/test_functions.hpp"
#include "tracelab/vec.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace tracelab::transport {

/// Periodic cell [0, kCellWidth) x [0, kCellHeight). Slab 0 moves blocks with
/// horizontal period 2, so the cell is two units wide.
inline constexpr double kCellWidth = 2.0;
inline constexpr double kCellHeight = 1.0;

/// Slab k covers t in (2^{-k-1}, 2^{-k}].
double slab_start(int k);
double slab_end(int k);
double slab_duration(int k);

/// Slab containing t. Throws TimeOutOfRange for t outside (0, 1].
int slab_of(double t);

/// Stripe value (-1)^floor(2^level x).
int stripe_value(int level, double x);

/// +-1 values on the cells of a grid with 2^resolution cells per unit length
/// over the periodic cell, tagged with the level of the cascade it represents.
class DyadicPattern {
public:
    DyadicPattern(int level, int resolution, std::vector<std::int8_t> values);

    /// Stripes of width 2^{-level}; needs resolution >= level.
    static DyadicPattern stripes(int level, int resolution);

    int level() const { return level_; }
    int resolution() const { return resolution_; }
    std::size_t columns() const { return columns_; }
    std::size_t rows() const { return rows_; }
    double cell_size() const;

    std::int8_t at(std::size_t col, std::size_t row) const { return values_[row * columns_ + col]; }
    const std::vector<std::int8_t>& values() const { return values_; }

    /// Periodic point lookup.
    std::int8_t value(const Vec& x) const;

    /// Cell average of beta(value).
    double mean(const std::function<double(double)>& beta) const;

    friend bool operator==(const DyadicPattern&, const DyadicPattern&) = default;

private:
    int level_;
    int resolution_;
    std::size_t columns_;
    std::size_t rows_;
    std::vector<std::int8_t> values_;
};

/// Applies the 180 degree block rotations of slab k as a cell permutation.
/// Throws LevelMismatch unless p.level() == k + 1 and the grid resolves the
/// blocks.
DyadicPattern evolve_exact(const DyadicPattern& p, int k);

enum class Turn { half, quarter };

/// Position of a point relative to the square vortex that contains it:
/// block center, sup-norm radius m and counterclockwise arclength sigma
/// measured from the midpoint of the right side.
struct ContourCoords {
    Vec center;
    double m;
    double sigma;
};

/// nullopt outside the blocks of slab k.
std::optional<ContourCoords> contour_coords(int k, const Vec& x);
/// Point at arclength sigma (taken mod 8m) on the square of radius m.
Vec contour_point(const Vec& center, double m, double sigma);
/// Counterclockwise unit tangent at arclength sigma.
Vec contour_tangent(double m, double sigma);

/// Velocity of slab k (time independent inside the slab). Throws OutsideSlab
/// when t is not in (2^{-k-1}, 2^{-k}].
Vec slab_field_eval(int k, const Vec& x, double t, Turn turn = Turn::half);

/// Velocity of the slab containing t.
Vec cascade_field_eval(const Vec& x, double t);

enum class Solution { trivial_zero, depauw_cascade };
std::string_view to_string(Solution w);
std::optional<Solution> solution_from_string(std::string_view name);

/// Throws TimeOutOfRange for t outside (0, 1].
double solution_eval(Solution w, const Vec& x, double t);

/// Field of the 3D lift at (y1, y2, r): (b(y, r), 1) for 0 < r < 1 and
/// (0, 0, 1) for r >= 1. Throws OutsideDomain for r <= 0.
Vec lift_field_eval(const Vec& x);

/// w(y, r) 1_{r < t} with w the cascade; 0 for r >= 1.
double lifted_solution_eval(const Vec& x, double t);

struct WeakResidual {
    double value = 0.0;
    int level = 0;
    double t_cut = 0.0;
    std::size_t evaluations = 0;
};

/// Tensor midpoint estimate of |int_{t_cut}^1 int_cell w (d_t phi + b . grad phi)|
/// with spacing 2^{-level} in space and time. t_cut must be a multiple of
/// 2^{-level} in [0, 1).
WeakResidual weak_residual(Solution w, const SpaceTimeTestFunction& phi, int level, double t_cut = 0.0);

/// Residual of the 3D lift against phi(y, r) C(t) with C(t) = (1 - t)^2, after
/// integrating out t in closed form. Reports the signed value.
WeakResidual lift_residual(const TestFunction& phi, int level);

/// Cell average of beta(w(., t)): exact at dyadic times, midpoint rule on a
/// grid with 2^resolution cells per unit otherwise.
double cell_mean(Solution w, double t, const std::function<double(double)>& beta, int resolution);

struct DefectReport {
    std::vector<double> times;
    std::vector<double> values;
    double initial_value = 0.0;  // beta(0), the datum at t = 0
    double jump = 0.0;
};

/// Per-time values of the cell average of beta(w) and the jump between the
/// t -> 0 limit (value at the smallest time) and beta(0).
DefectReport renormalization_defect(Solution w, const std::function<double(double)>& beta,
                                    const std::vector<double>& times, int resolution);

/// Discrete total variation of slab k's field per unit area, computed on one
/// period cell sampled with n x n points per block.
double tv_density(int k, int n = 256);

}  // namespace tracelab::transport
