#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "orlicz_ot/solvers.hpp"

namespace orlicz_ot {

namespace {

void check_balanced(const std::vector<double>& mu1, const std::vector<double>& mu2) {
    if (mu1.empty() || mu2.empty()) throw std::invalid_argument("exact solver: empty marginal");
    for (const double m : mu1) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("exact solver: invalid mass");
    }
    for (const double m : mu2) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("exact solver: invalid mass");
    }
    const double s1 = std::accumulate(mu1.begin(), mu1.end(), 0.0);
    const double s2 = std::accumulate(mu2.begin(), mu2.end(), 0.0);
    if (std::abs(s1 - s2) > 1e-12) throw std::invalid_argument("exact solver: unbalanced marginals");
}

}  // namespace

SparsePlan nw_monotone_1d(const std::vector<double>& mu1, const std::vector<double>& x,
                          const std::vector<double>& mu2, const std::vector<double>& y,
                          const CostSpec& cost) {
    if (mu1.size() != x.size() || mu2.size() != y.size()) {
        throw std::invalid_argument("nw_monotone_1d: masses and support points differ in length");
    }
    if (!std::is_sorted(x.begin(), x.end()) || !std::is_sorted(y.begin(), y.end())) {
        throw std::invalid_argument("nw_monotone_1d: support points must be sorted");
    }
    check_balanced(mu1, mu2);

    SparsePlan plan;
    std::size_t i = 0;
    std::size_t j = 0;
    double r1 = mu1[0];
    double r2 = mu2[0];
    while (i < mu1.size() && j < mu2.size()) {
        const double m = std::min(r1, r2);
        if (m > 0.0) {
            plan.entries.push_back({i, j, m});
            plan.value += m * cost(x[i], y[j]);
        }
        r1 -= m;
        r2 -= m;
        if (r1 <= 0.0) {
            if (++i < mu1.size()) r1 = mu1[i];
        } else {
            if (++j < mu2.size()) r2 = mu2[j];
        }
    }
    return plan;
}

SimplexResult transportation_simplex(const std::vector<double>& mu1, const std::vector<double>& mu2,
                                     const DenseMatrix& cost) {
    check_balanced(mu1, mu2);
    const std::size_t m = mu1.size();
    const std::size_t n = mu2.size();
    if (cost.rows() != m || cost.cols() != n) {
        throw std::invalid_argument("transportation_simplex: cost shape does not match the marginals");
    }
    double cmax = 0.0;
    for (const double c : cost.values()) {
        if (!std::isfinite(c)) throw std::invalid_argument("transportation_simplex: non-finite cost");
        cmax = std::max(cmax, std::abs(c));
    }
    const double tol = 1e-12 * std::max(1.0, cmax);

    SimplexResult res;
    res.plan = DenseMatrix(m, n, 0.0);
    DenseMatrix& x = res.plan;
    std::vector<char> basic(m * n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> basis;

    // North-west corner start; zero-mass basics keep the basis a spanning tree.
    {
        std::vector<double> a = mu1;
        std::vector<double> b = mu2;
        std::size_t i = 0;
        std::size_t j = 0;
        for (;;) {
            const double q = std::min(a[i], b[j]);
            x(i, j) = q;
            basic[i * n + j] = 1;
            basis.emplace_back(i, j);
            a[i] -= q;
            b[j] -= q;
            if (i == m - 1 && j == n - 1) break;
            if (i == m - 1) {
                ++j;
            } else if (j == n - 1) {
                ++i;
            } else if (a[i] <= b[j]) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    res.u.assign(m, 0.0);
    res.v.assign(n, 0.0);
    const std::size_t nodes = m + n;
    std::vector<std::vector<std::size_t>> adj(nodes);  // basis indices touching each node
    std::vector<char> seen(nodes);
    std::vector<std::size_t> parent_node(nodes);
    std::vector<std::size_t> parent_edge(nodes);

    auto rebuild_adjacency = [&] {
        for (auto& a : adj) a.clear();
        for (std::size_t e = 0; e < basis.size(); ++e) {
            adj[basis[e].first].push_back(e);
            adj[m + basis[e].second].push_back(e);
        }
    };

    auto compute_potentials = [&] {
        std::fill(seen.begin(), seen.end(), 0);
        std::queue<std::size_t> todo;
        res.u[0] = 0.0;
        seen[0] = 1;
        todo.push(0);
        while (!todo.empty()) {
            const std::size_t node = todo.front();
            todo.pop();
            for (const std::size_t e : adj[node]) {
                const auto [i, j] = basis[e];
                const std::size_t other = node < m ? m + j : i;
                if (seen[other]) continue;
                seen[other] = 1;
                if (node < m) {
                    res.v[j] = cost(i, j) - res.u[i];
                } else {
                    res.u[i] = cost(i, j) - res.v[j];
                }
                todo.push(other);
            }
        }
    };

    const long long max_pivots = 50LL * static_cast<long long>(m * n) + 1000;
    for (;;) {
        rebuild_adjacency();
        compute_potentials();

        // Bland: first improving cell in row-major order.
        std::size_t ei = m;
        std::size_t ej = n;
        double min_rc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (basic[i * n + j]) continue;
                const double rc = cost(i, j) - res.u[i] - res.v[j];
                min_rc = std::min(min_rc, rc);
                if (ei == m && rc < -tol) {
                    ei = i;
                    ej = j;
                }
            }
        }
        res.min_reduced_cost = min_rc;
        if (ei == m) {
            res.optimal = true;
            break;
        }
        if (res.pivots >= max_pivots) break;

        // Tree path from row node ei to column node ej closes the cycle.
        std::fill(seen.begin(), seen.end(), 0);
        std::queue<std::size_t> todo;
        seen[ei] = 1;
        todo.push(ei);
        const std::size_t target = m + ej;
        while (!todo.empty() && !seen[target]) {
            const std::size_t node = todo.front();
            todo.pop();
            for (const std::size_t e : adj[node]) {
                const auto [i, j] = basis[e];
                const std::size_t other = node < m ? m + j : i;
                if (seen[other]) continue;
                seen[other] = 1;
                parent_node[other] = node;
                parent_edge[other] = e;
                todo.push(other);
            }
        }
        std::vector<std::size_t> path;  // from column ej back to row ei
        for (std::size_t node = target; node != ei; node = parent_node[node]) path.push_back(parent_edge[node]);

        // Cells at even path positions lose mass; the smallest leaves, lowest index on ties.
        std::size_t leave = basis.size();
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const auto [i, j] = basis[path[k]];
            const double val = x(i, j);
            if (val < theta ||
                (val == theta && leave < basis.size() && i * n + j < basis[leave].first * n + basis[leave].second)) {
                theta = val;
                leave = path[k];
            }
        }
        x(ei, ej) = theta;
        for (std::size_t k = 0; k < path.size(); ++k) {
            const auto [i, j] = basis[path[k]];
            if (k % 2 == 0) {
                x(i, j) = std::max(0.0, x(i, j) - theta);
            } else {
                x(i, j) += theta;
            }
        }
        const auto [li, lj] = basis[leave];
        x(li, lj) = 0.0;
        basic[li * n + lj] = 0;
        basic[ei * n + ej] = 1;
        basis[leave] = {ei, ej};
        ++res.pivots;
    }

    res.value = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) res.value += x(i, j) * cost(i, j);
    }
    return res;
}

}  // namespace orlicz_ot
