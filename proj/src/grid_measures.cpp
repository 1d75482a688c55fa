#include "orlicz_ot/grid_measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "orlicz_ot/quadrature.hpp"

namespace orlicz_ot {

Axis::Axis(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
    if (boundaries_.size() < 2) {
        throw std::invalid_argument("Axis: need at least two boundaries");
    }
    for (std::size_t k = 0; k < boundaries_.size(); ++k) {
        if (!std::isfinite(boundaries_[k])) throw std::invalid_argument("Axis: non-finite boundary");
        if (k > 0 && !(boundaries_[k] > boundaries_[k - 1])) {
            throw std::invalid_argument("Axis: boundaries must be strictly increasing");
        }
    }
}

std::size_t Axis::locate(double x) const {
    if (!(x >= boundaries_.front() && x <= boundaries_.back())) {
        std::ostringstream msg;
        msg << "point " << x << " outside [" << boundaries_.front() << ", " << boundaries_.back() << "]";
        throw std::out_of_range(msg.str());
    }
    // First upper boundary >= x: ties go to the lower-index cell.
    const auto it = std::lower_bound(boundaries_.begin() + 1, boundaries_.end(), x);
    return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
}

bool Axis::is_uniform(double rel_tol) const {
    const double mean = (back() - front()) / static_cast<double>(cells());
    for (std::size_t i = 0; i < cells(); ++i) {
        if (std::abs(width(i) - mean) > rel_tol * mean) return false;
    }
    return true;
}

GridPartition::GridPartition(std::vector<Axis> axes, int level) : axes_(std::move(axes)), level_(level) {
    if (axes_.empty() || axes_.size() > 2) {
        throw std::invalid_argument("GridPartition: 1 or 2 axes supported");
    }
}

GridPartition GridPartition::uniform(const std::vector<std::pair<double, double>>& box, int level) {
    if (level < 0 || level > 24) throw std::invalid_argument("GridPartition: level must be in [0, 24]");
    std::vector<Axis> axes;
    const std::size_t n = std::size_t{1} << level;
    for (const auto& [a, b] : box) {
        if (!(b > a)) throw std::invalid_argument("GridPartition: empty interval");
        std::vector<double> bounds(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            bounds[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n);
        }
        bounds.back() = b;
        axes.emplace_back(std::move(bounds));
    }
    return GridPartition(std::move(axes), level);
}

std::size_t GridPartition::cell_count() const noexcept {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= a.cells();
    return n;
}

double GridPartition::cell_volume(std::size_t flat_index) const {
    if (dims() == 1) return axes_[0].width(flat_index);
    const std::size_t n2 = axes_[1].cells();
    return axes_[0].width(flat_index / n2) * axes_[1].width(flat_index % n2);
}

GridPartition dyadic_refine(const GridPartition& p) {
    std::vector<Axis> axes;
    std::vector<std::vector<std::size_t>> parents;
    for (const auto& axis : p.axes()) {
        std::vector<double> bounds;
        std::vector<std::size_t> parent;
        for (std::size_t i = 0; i < axis.cells(); ++i) {
            bounds.push_back(axis.lower(i));
            bounds.push_back(axis.midpoint(i));
            parent.push_back(i);
            parent.push_back(i);
        }
        bounds.push_back(axis.back());
        axes.emplace_back(std::move(bounds));
        parents.push_back(std::move(parent));
    }
    GridPartition out(std::move(axes), p.level() + 1);
    out.parents_ = std::move(parents);
    return out;
}

bool is_nested(const GridPartition& fine, const GridPartition& coarse) {
    if (fine.dims() != coarse.dims()) return false;
    for (std::size_t a = 0; a < fine.dims(); ++a) {
        const Axis& f = fine.axis(a);
        const Axis& c = coarse.axis(a);
        if (f.front() != c.front() || f.back() != c.back()) return false;
        for (std::size_t i = 0; i < f.cells(); ++i) {
            const std::size_t parent = c.locate(f.midpoint(i));
            if (f.lower(i) < c.lower(parent) || f.upper(i) > c.upper(parent)) return false;
        }
    }
    return true;
}

MeasureSpec MeasureSpec::lebesgue(double scale) {
    MeasureSpec s;
    s.kind = Kind::lebesgue;
    s.scale = scale;
    return s;
}

MeasureSpec MeasureSpec::atom(double at, double mass) { return atom(std::vector<double>{at}, mass); }

MeasureSpec MeasureSpec::atom(std::vector<double> at, double mass) {
    MeasureSpec s;
    s.kind = Kind::atom;
    s.at = std::move(at);
    s.mass = mass;
    return s;
}

MeasureSpec MeasureSpec::mixture(std::vector<MeasureSpec> parts) {
    MeasureSpec s;
    s.kind = Kind::mixture;
    s.parts = std::move(parts);
    return s;
}

MeasureSpec MeasureSpec::cells(std::vector<double> masses) {
    MeasureSpec s;
    s.kind = Kind::cells;
    s.cell_masses = std::move(masses);
    return s;
}

double GridMeasure::total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

namespace {

void add_masses(const MeasureSpec& spec, const GridPartition& p, std::vector<double>& out) {
    switch (spec.kind) {
        case MeasureSpec::Kind::lebesgue:
            if (!(spec.scale >= 0.0) || !std::isfinite(spec.scale)) {
                throw std::invalid_argument("lebesgue measure: scale must be finite and >= 0");
            }
            for (std::size_t c = 0; c < out.size(); ++c) out[c] += spec.scale * p.cell_volume(c);
            return;
        case MeasureSpec::Kind::atom: {
            if (spec.at.size() != p.dims()) {
                throw std::invalid_argument("atom: location dimension does not match the partition");
            }
            if (!(spec.mass >= 0.0) || !std::isfinite(spec.mass)) {
                throw std::invalid_argument("atom: mass must be finite and >= 0");
            }
            const std::size_t i = p.axis(0).locate(spec.at[0]);
            const std::size_t flat = p.dims() == 1 ? i : p.flat(i, p.axis(1).locate(spec.at[1]));
            out[flat] += spec.mass;
            return;
        }
        case MeasureSpec::Kind::mixture:
            for (const auto& part : spec.parts) add_masses(part, p, out);
            return;
        case MeasureSpec::Kind::cells:
            if (spec.cell_masses.size() != out.size()) {
                throw std::invalid_argument("cells measure: mass count does not match the partition");
            }
            for (std::size_t c = 0; c < out.size(); ++c) {
                if (!(spec.cell_masses[c] >= 0.0) || !std::isfinite(spec.cell_masses[c])) {
                    throw std::invalid_argument("cells measure: masses must be finite and >= 0");
                }
                out[c] += spec.cell_masses[c];
            }
            return;
    }
}

// Restriction of a 1-D measure spec to one cell: Lebesgue density plus atoms.
struct CellMeasure {
    double density = 0.0;
    std::vector<std::pair<double, double>> atoms;
};

void restrict_to_cell(const MeasureSpec& spec, const Axis& axis, std::size_t cell, CellMeasure& out) {
    switch (spec.kind) {
        case MeasureSpec::Kind::lebesgue:
            out.density += spec.scale;
            return;
        case MeasureSpec::Kind::atom:
            if (spec.at.size() != 1) throw std::invalid_argument("atom: expected a 1-D location");
            if (axis.locate(spec.at[0]) == cell) out.atoms.emplace_back(spec.at[0], spec.mass);
            return;
        case MeasureSpec::Kind::mixture:
            for (const auto& part : spec.parts) restrict_to_cell(part, axis, cell, out);
            return;
        case MeasureSpec::Kind::cells:
            if (spec.cell_masses.size() != axis.cells()) {
                throw std::invalid_argument("cells measure: mass count does not match the axis");
            }
            out.density += spec.cell_masses[cell] / axis.width(cell);
            return;
    }
}

}  // namespace

GridMeasure bin_measure(const MeasureSpec& spec, const GridPartition& partition) {
    GridMeasure m{partition, std::vector<double>(partition.cell_count(), 0.0)};
    add_masses(spec, partition, m.masses);
    return m;
}

GridFunction binned_density(const GridMeasure& nu, const GridMeasure& lambda) {
    if (nu.masses.size() != lambda.masses.size()) {
        throw std::invalid_argument("binned_density: partitions differ");
    }
    GridFunction f{nu.partition, std::vector<double>(nu.masses.size())};
    for (std::size_t c = 0; c < nu.masses.size(); ++c) {
        if (!(lambda.masses[c] > 0.0)) {
            throw std::invalid_argument("binned_density: base measure has a zero-mass cell at index " +
                                        std::to_string(c));
        }
        f.values[c] = nu.masses[c] / lambda.masses[c];
    }
    return f;
}

GridMeasure coarsen(const GridMeasure& fine, const GridPartition& coarse) {
    const GridPartition& p = fine.partition;
    if (p.dims() != coarse.dims()) throw std::invalid_argument("coarsen: dimension mismatch");
    GridMeasure out{coarse, std::vector<double>(coarse.cell_count(), 0.0)};
    if (p.dims() == 1) {
        for (std::size_t i = 0; i < p.axis(0).cells(); ++i) {
            out.masses[coarse.axis(0).locate(p.axis(0).midpoint(i))] += fine.masses[i];
        }
        return out;
    }
    for (std::size_t i = 0; i < p.axis(0).cells(); ++i) {
        const std::size_t ci = coarse.axis(0).locate(p.axis(0).midpoint(i));
        for (std::size_t j = 0; j < p.axis(1).cells(); ++j) {
            const std::size_t cj = coarse.axis(1).locate(p.axis(1).midpoint(j));
            out.masses[coarse.flat(ci, cj)] += fine.masses[p.flat(i, j)];
        }
    }
    return out;
}

GridFunction plan_marginal(const DenseMatrix& plan, const GridMeasure& lambda1,
                           const GridMeasure& lambda2, int axis) {
    if (plan.rows() != lambda1.masses.size() || plan.cols() != lambda2.masses.size()) {
        throw std::invalid_argument("plan_marginal: plan shape does not match the base measures");
    }
    if (axis == 0) {
        GridFunction m{lambda1.partition, std::vector<double>(plan.rows(), 0.0)};
        for (std::size_t i = 0; i < plan.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < plan.cols(); ++j) s += plan(i, j) * lambda2.masses[j];
            m.values[i] = s;
        }
        return m;
    }
    if (axis == 1) {
        GridFunction m{lambda2.partition, std::vector<double>(plan.cols(), 0.0)};
        for (std::size_t i = 0; i < plan.rows(); ++i) {
            for (std::size_t j = 0; j < plan.cols(); ++j) m.values[j] += plan(i, j) * lambda1.masses[i];
        }
        return m;
    }
    throw std::invalid_argument("plan_marginal: axis must be 0 or 1");
}

double CostSpec::operator()(double x, double y) const {
    switch (kind) {
        case Kind::squared_distance: return (x - y) * (x - y);
        case Kind::absolute_distance: return std::abs(x - y);
        case Kind::zero: return 0.0;
        case Kind::matrix: break;
    }
    throw std::logic_error("CostSpec: a tabulated cost has no pointwise values");
}

DenseMatrix cell_average_cost(const CostSpec& cost, const GridPartition& grid,
                              const MeasureSpec& lambda1, const MeasureSpec& lambda2,
                              int quadrature_order) {
    if (grid.dims() != 2) throw std::invalid_argument("cell_average_cost: need a two-axis partition");
    const Axis& ax = grid.axis(0);
    const Axis& ay = grid.axis(1);
    const std::size_t n1 = ax.cells();
    const std::size_t n2 = ay.cells();

    if (cost.kind == CostSpec::Kind::matrix) {
        if (cost.matrix.rows() != n1 || cost.matrix.cols() != n2) {
            throw std::invalid_argument("cell_average_cost: tabulated cost has the wrong shape");
        }
        for (const double v : cost.matrix.values()) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("cell_average_cost: tabulated cost must be finite (bounded below)");
            }
        }
        return cost.matrix;
    }
    DenseMatrix c(n1, n2, 0.0);
    if (cost.kind == CostSpec::Kind::zero) return c;

    std::vector<CellMeasure> rows(n1);
    std::vector<CellMeasure> cols(n2);
    std::vector<QuadratureRule> rules_x;
    std::vector<QuadratureRule> rules_y;
    for (std::size_t i = 0; i < n1; ++i) {
        restrict_to_cell(lambda1, ax, i, rows[i]);
        rules_x.push_back(gauss_legendre(quadrature_order, ax.lower(i), ax.upper(i)));
    }
    for (std::size_t j = 0; j < n2; ++j) {
        restrict_to_cell(lambda2, ay, j, cols[j]);
        rules_y.push_back(gauss_legendre(quadrature_order, ay.lower(j), ay.upper(j)));
    }

    for (std::size_t i = 0; i < n1; ++i) {
        const CellMeasure& mx = rows[i];
        const QuadratureRule& qx = rules_x[i];
        double mass_x = mx.density * ax.width(i);
        for (const auto& a : mx.atoms) mass_x += a.second;
        for (std::size_t j = 0; j < n2; ++j) {
            const CellMeasure& my = cols[j];
            const QuadratureRule& qy = rules_y[j];
            double mass_y = my.density * ay.width(j);
            for (const auto& a : my.atoms) mass_y += a.second;
            if (!(mass_x > 0.0) || !(mass_y > 0.0)) {
                c(i, j) = cost(ax.midpoint(i), ay.midpoint(j));
                continue;
            }
            double integral = 0.0;
            if (mx.density > 0.0 && my.density > 0.0) {
                double s = 0.0;
                for (std::size_t a = 0; a < qx.nodes.size(); ++a) {
                    for (std::size_t b = 0; b < qy.nodes.size(); ++b) {
                        s += qx.weights[a] * qy.weights[b] * cost(qx.nodes[a], qy.nodes[b]);
                    }
                }
                integral += mx.density * my.density * s;
            }
            if (mx.density > 0.0) {
                for (const auto& [y, m] : my.atoms) {
                    double s = 0.0;
                    for (std::size_t a = 0; a < qx.nodes.size(); ++a) s += qx.weights[a] * cost(qx.nodes[a], y);
                    integral += mx.density * m * s;
                }
            }
            if (my.density > 0.0) {
                for (const auto& [x, m] : mx.atoms) {
                    double s = 0.0;
                    for (std::size_t b = 0; b < qy.nodes.size(); ++b) s += qy.weights[b] * cost(x, qy.nodes[b]);
                    integral += my.density * m * s;
                }
            }
            for (const auto& [x, mxa] : mx.atoms) {
                for (const auto& [y, mya] : my.atoms) integral += mxa * mya * cost(x, y);
            }
            c(i, j) = integral / (mass_x * mass_y);
        }
    }
    return c;
}

GridPartition pad_partition(const GridPartition& p, std::size_t pad) {
    if (pad == 0) return p;
    std::vector<Axis> axes;
    for (const auto& axis : p.axes()) {
        if (!axis.is_uniform()) throw std::invalid_argument("pad_partition: axis is not uniform");
        const double h = (axis.back() - axis.front()) / static_cast<double>(axis.cells());
        std::vector<double> bounds;
        for (std::size_t k = pad; k > 0; --k) bounds.push_back(axis.front() - static_cast<double>(k) * h);
        bounds.insert(bounds.end(), axis.boundaries().begin(), axis.boundaries().end());
        for (std::size_t k = 1; k <= pad; ++k) bounds.push_back(axis.back() + static_cast<double>(k) * h);
        axes.emplace_back(std::move(bounds));
    }
    return GridPartition(std::move(axes), p.level());
}

std::vector<double> pad_values(const GridPartition& p, const std::vector<double>& values, std::size_t pad) {
    if (values.size() != p.cell_count()) throw std::invalid_argument("pad_values: size mismatch");
    if (p.dims() == 1) {
        std::vector<double> out(values.size() + 2 * pad, 0.0);
        std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(pad));
        return out;
    }
    const std::size_t n1 = p.axis(0).cells();
    const std::size_t n2 = p.axis(1).cells();
    const std::size_t m2 = n2 + 2 * pad;
    std::vector<double> out((n1 + 2 * pad) * m2, 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) out[(i + pad) * m2 + (j + pad)] = values[i * n2 + j];
    }
    return out;
}

std::size_t mollifier_support(double delta, double h) {
    auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(delta / h) - 1.0));
    while (static_cast<double>(k + 1) * h < delta) ++k;
    while (k > 0 && static_cast<double>(k) * h >= delta) --k;
    return k;
}

namespace {

std::vector<double> kernel_weights(Kernel kernel, double delta, double h, std::size_t support) {
    std::vector<double> w(2 * support + 1);
    double sum = 0.0;
    for (std::size_t idx = 0; idx < w.size(); ++idx) {
        const double x = (static_cast<double>(idx) - static_cast<double>(support)) * h / delta;
        const double v = kernel == Kernel::bump ? std::pow(1.0 - x * x, 3) : 1.0;
        w[idx] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

// Convolution along one axis of a row-major array with `count` lines of
// length `n` spaced by `stride` (stride 1: rows; stride n_other: columns).
void convolve_lines(std::vector<double>& data, std::size_t n, std::size_t count, std::size_t line_step,
                    std::size_t stride, const std::vector<double>& w) {
    const auto support = static_cast<std::ptrdiff_t>(w.size() / 2);
    std::vector<double> line(n);
    for (std::size_t l = 0; l < count; ++l) {
        const std::size_t base = l * line_step;
        for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * stride];
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::ptrdiff_t k = -support; k <= support; ++k) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) - k;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
                s += w[static_cast<std::size_t>(k + support)] * line[static_cast<std::size_t>(src)];
            }
            data[base + i * stride] = s;
        }
    }
}

}  // namespace

MollifyResult mollify(const GridFunction& f, double delta, Kernel kernel, std::size_t min_pad) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("mollify: delta must be > 0");
    const GridPartition& p = f.partition;
    if (f.values.size() != p.cell_count()) throw std::invalid_argument("mollify: size mismatch");

    std::vector<double> widths;
    std::vector<std::size_t> supports;
    std::size_t pad = min_pad;
    for (const auto& axis : p.axes()) {
        if (!axis.is_uniform()) throw std::invalid_argument("mollify: partition must be uniform");
        const double h = (axis.back() - axis.front()) / static_cast<double>(axis.cells());
        widths.push_back(h);
        supports.push_back(mollifier_support(delta, h));
        pad = std::max(pad, supports.back());
    }

    const bool degenerate = std::all_of(supports.begin(), supports.end(), [](std::size_t k) { return k == 0; });
    const GridPartition padded = pad_partition(p, pad);
    std::vector<double> data = pad_values(p, f.values, pad);

    double mass_in = 0.0;
    for (std::size_t c = 0; c < f.values.size(); ++c) mass_in += f.values[c] * p.cell_volume(c);

    if (!degenerate) {
        if (p.dims() == 1) {
            convolve_lines(data, data.size(), 1, 0, 1, kernel_weights(kernel, delta, widths[0], supports[0]));
        } else {
            const std::size_t m1 = padded.axis(0).cells();
            const std::size_t m2 = padded.axis(1).cells();
            convolve_lines(data, m2, m1, m2, 1, kernel_weights(kernel, delta, widths[1], supports[1]));
            convolve_lines(data, m1, m2, 1, m2, kernel_weights(kernel, delta, widths[0], supports[0]));
        }
        double mass_out = 0.0;
        for (std::size_t c = 0; c < data.size(); ++c) mass_out += data[c] * padded.cell_volume(c);
        if (mass_out > 0.0) {
            const double scale = mass_in / mass_out;
            for (double& v : data) v *= scale;
        }
    }
    return MollifyResult{GridFunction{padded, std::move(data)}, pad, degenerate};
}

double partition_gap(const std::vector<std::pair<double, double>>& box, const GridMeasure& nu) {
    const GridPartition& p = nu.partition;
    if (box.size() != p.dims()) throw std::invalid_argument("partition_gap: box dimension mismatch");
    auto classify = [&box](const Axis& axis, std::size_t a, std::size_t i, bool& inside, bool& meets) {
        const double lo = axis.lower(i);
        const double hi = axis.upper(i);
        inside = lo >= box[a].first && hi <= box[a].second;
        meets = std::min(hi, box[a].second) > std::max(lo, box[a].first);
    };
    double outer = 0.0;
    double inner = 0.0;
    for (std::size_t c = 0; c < nu.masses.size(); ++c) {
        bool inside = true;
        bool meets = true;
        if (p.dims() == 1) {
            classify(p.axis(0), 0, c, inside, meets);
        } else {
            const std::size_t n2 = p.axis(1).cells();
            bool in0 = false, m0 = false, in1 = false, m1 = false;
            classify(p.axis(0), 0, c / n2, in0, m0);
            classify(p.axis(1), 1, c % n2, in1, m1);
            inside = in0 && in1;
            meets = m0 && m1;
        }
        if (meets) outer += nu.masses[c];
        if (inside && meets) inner += nu.masses[c];
    }
    return outer - inner;
}

double luxemburg_norm(const Regularizer& reg, const GridFunction& f, const GridMeasure& nu, double bound) {
    if (f.values.size() != nu.masses.size()) {
        throw std::invalid_argument("luxemburg_norm: function and measure partitions differ");
    }
    return luxemburg_norm(reg, std::span<const double>(f.values), std::span<const double>(nu.masses), bound);
}

std::vector<double> load_cell_masses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cell-mass file: " + path);
    std::vector<double> masses;
    std::vector<bool> seen;
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected `index,mass`");
        }
        std::size_t index = 0;
        double mass = 0.0;
        try {
            const long long raw = std::stoll(line.substr(0, comma));
            if (raw < 0) throw std::invalid_argument("negative");
            index = static_cast<std::size_t>(raw);
            mass = std::stod(line.substr(comma + 1));
        } catch (const std::logic_error&) {
            if (first) {
                first = false;
                continue;
            }
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        }
        first = false;
        if (!(mass >= 0.0) || !std::isfinite(mass)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": mass must be finite and >= 0");
        }
        if (index >= masses.size()) {
            masses.resize(index + 1, 0.0);
            seen.resize(index + 1, false);
        }
        if (seen[index]) throw std::runtime_error(path + ": duplicate index " + std::to_string(index));
        seen[index] = true;
        masses[index] = mass;
    }
    if (masses.empty()) throw std::runtime_error(path + ": no cell masses");
    return masses;
}

}  // namespace orlicz_ot
