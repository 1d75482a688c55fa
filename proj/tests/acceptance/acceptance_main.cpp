#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "acceptance_checks.hpp"

namespace {

struct Criterion {
    int id;
    const char* title;
    acceptance::Outcome (*run)();
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "binned Dirac entropy term equals gamma log(h^-2)", acceptance::dirac_entropy_identity},
        {2, "atom-plus-Lebesgue ladder matches (1+h)^-2 / 2", acceptance::atom_plus_lebesgue_ladder},
        {3, "coupled sweeps on shifted uniforms reach 0.25 within 2%", acceptance::shifted_uniform_sweeps},
        {4, "failing coupling schedule is detected", acceptance::failing_coupling_detection},
        {5, "generic solver matches closed-form entropy updates", acceptance::closed_form_equivalence},
        {6, "strong duality at convergence", acceptance::strong_duality},
        {7, "closed-form conjugates match the numeric Legendre transform", acceptance::conjugate_oracle_suite},
        {8, "randomized property suites", acceptance::property_suites},
        {9, "exact solvers agree", acceptance::exact_solver_agreement},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        acceptance::Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d: %s [%.2f s] -- %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
