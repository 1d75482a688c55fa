#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "orlicz_ot/dense_matrix.hpp"
#include "orlicz_ot/young_functions.hpp"

namespace orlicz_ot {

// Sorted cell boundaries of one compact interval.
class Axis {
public:
    explicit Axis(std::vector<double> boundaries);

    std::size_t cells() const noexcept { return boundaries_.size() - 1; }
    double lower(std::size_t i) const { return boundaries_[i]; }
    double upper(std::size_t i) const { return boundaries_[i + 1]; }
    double width(std::size_t i) const { return boundaries_[i + 1] - boundaries_[i]; }
    double midpoint(std::size_t i) const { return 0.5 * (boundaries_[i] + boundaries_[i + 1]); }
    double front() const { return boundaries_.front(); }
    double back() const { return boundaries_.back(); }
    const std::vector<double>& boundaries() const noexcept { return boundaries_; }

    // Cell containing x. A point on a shared boundary belongs to the
    // lower-index cell. Throws std::out_of_range outside [front, back].
    std::size_t locate(double x) const;

    // All widths equal to `rel_tol` relative to the mean width.
    bool is_uniform(double rel_tol = 1e-9) const;

    bool operator==(const Axis&) const = default;

private:
    std::vector<double> boundaries_;
};

class GridPartition {
public:
    GridPartition(std::vector<Axis> axes, int level = 0);

    // 2^level equal cells per axis on each [a, b].
    static GridPartition uniform(const std::vector<std::pair<double, double>>& box, int level);

    std::size_t dims() const noexcept { return axes_.size(); }
    const Axis& axis(std::size_t a) const { return axes_.at(a); }
    const std::vector<Axis>& axes() const noexcept { return axes_; }
    int level() const noexcept { return level_; }
    std::size_t cell_count() const noexcept;

    // Row-major flat index; for one axis the index is i itself.
    std::size_t flat(std::size_t i, std::size_t j) const { return i * axes_.back().cells() + j; }

    // Parent cell index per axis at level - 1 (empty when not produced by
    // refinement).
    const std::vector<std::vector<std::size_t>>& parents() const noexcept { return parents_; }

    // Lebesgue measure (length or area) of a flat cell.
    double cell_volume(std::size_t flat_index) const;

    bool operator==(const GridPartition& other) const { return axes_ == other.axes_; }

private:
    friend GridPartition dyadic_refine(const GridPartition& p);
    std::vector<Axis> axes_;
    int level_ = 0;
    std::vector<std::vector<std::size_t>> parents_;
};

// Splits every cell in half along every axis and records parent links.
GridPartition dyadic_refine(const GridPartition& p);

// Every cell of `fine` lies inside exactly one cell of `coarse`.
bool is_nested(const GridPartition& fine, const GridPartition& coarse);

// Declarative measure: Lebesgue (times a scale), a point mass, a mixture, or
// explicit cell masses on the target partition.
struct MeasureSpec {
    enum class Kind { lebesgue, atom, mixture, cells };
    Kind kind = Kind::lebesgue;
    double scale = 1.0;               // lebesgue
    std::vector<double> at;           // atom location, one coordinate per axis
    double mass = 1.0;                // atom
    std::vector<MeasureSpec> parts;   // mixture
    std::vector<double> cell_masses;  // cells

    static MeasureSpec lebesgue(double scale = 1.0);
    static MeasureSpec atom(double at, double mass = 1.0);
    static MeasureSpec atom(std::vector<double> at, double mass = 1.0);
    static MeasureSpec mixture(std::vector<MeasureSpec> parts);
    static MeasureSpec cells(std::vector<double> masses);
};

struct GridMeasure {
    GridPartition partition;
    std::vector<double> masses;

    double total() const;
};

struct GridFunction {
    GridPartition partition;
    std::vector<double> values;
};

// Exact cell masses. Atoms on shared boundaries go to the lower-index cell.
// Throws std::out_of_range for an atom outside the box and
// std::invalid_argument for malformed specs.
GridMeasure bin_measure(const MeasureSpec& spec, const GridPartition& partition);

// nu(cell) / lambda(cell). Throws std::invalid_argument on a zero lambda cell.
GridFunction binned_density(const GridMeasure& nu, const GridMeasure& lambda);

// Sums fine cell masses into the coarse cells containing them.
GridMeasure coarsen(const GridMeasure& fine, const GridPartition& coarse);

// Marginal density of a plan density p (rows on lambda1's cells, columns on
// lambda2's): axis 0 gives m_i = sum_j p_ij lambda2_j, axis 1 gives
// m_j = sum_i p_ij lambda1_i.
GridFunction plan_marginal(const DenseMatrix& plan, const GridMeasure& lambda1,
                           const GridMeasure& lambda2, int axis);

struct CostSpec {
    enum class Kind { squared_distance, absolute_distance, zero, matrix };
    Kind kind = Kind::squared_distance;
    DenseMatrix matrix;

    double operator()(double x, double y) const;
};

// lambda-weighted cell averages of c over I_ij = Q_i x Q_j with
// lambda = lambda1 (x) lambda2 on a two-axis partition. Absolutely
// continuous parts use a tensor Gauss-Legendre rule of the given order, atoms
// are evaluated exactly. Cells given by tabulated masses are treated as
// uniform within the cell. A tabulated matrix is returned unchanged.
DenseMatrix cell_average_cost(const CostSpec& cost, const GridPartition& grid,
                              const MeasureSpec& lambda1, const MeasureSpec& lambda2,
                              int quadrature_order = 3);

enum class Kernel { bump, box };

struct MollifyResult {
    GridFunction smoothed;  // on the zero-padded partition
    std::size_t pad = 0;    // cells added on each side of each axis
    bool degenerate = false;
};

// Discrete convolution of a Lebesgue density on a uniform partition with the
// kernel sampled at multiples of the cell width (bump: (1 - (x/delta)^2)^3 on
// |x| < delta; box: 1 on |x| < delta), normalized to unit sum. The partition
// is padded by max(min_pad, support) cells per side and the result is scaled
// to the input mass. delta <= cell width leaves the input unchanged with
// `degenerate` set. Two-axis inputs are smoothed with the product kernel.
MollifyResult mollify(const GridFunction& f, double delta, Kernel kernel = Kernel::bump,
                      std::size_t min_pad = 0);

// Number of k >= 1 with k h < delta: the kernel reaches this many cells on
// each side.
std::size_t mollifier_support(double delta, double h);

// Pads every axis of a uniform partition by `pad` cells of the same width.
GridPartition pad_partition(const GridPartition& p, std::size_t pad);

// Embeds cell values into the partition padded by `pad` cells (zeros outside).
std::vector<double> pad_values(const GridPartition& p, const std::vector<double>& values,
                               std::size_t pad);

// nu(A_+) - nu(A_-) for the axis-aligned box A: A_+ is the union of cells
// overlapping A in positive measure, A_- the union of cells inside A.
double partition_gap(const std::vector<std::pair<double, double>>& box, const GridMeasure& nu);

double luxemburg_norm(const Regularizer& reg, const GridFunction& f, const GridMeasure& nu,
                      double bound = 1.0);

// CSV `index,mass`; comment lines (#) and a non-numeric header are skipped.
std::vector<double> load_cell_masses(const std::string& path);

}  // namespace orlicz_ot
