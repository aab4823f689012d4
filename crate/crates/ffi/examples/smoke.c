#include <stdio.h>
#include "hvp.h"

int main(void) {
    const double bounds[4] = {0.0, 1.0, 0.0, 1.0};
    HvpDomain *d = NULL;
    if (hvp_domain_new(2, bounds, &d) != HVP_STATUS_OK) return 1;

    HvpEnergyParams p;
    HvpCoefficients c;
    hvp_default_params(d, 10.0, &p);
    hvp_coercivity_weak(&p, &c);
    printf("hvp %s, coercive=%d\n", hvp_version(), c.coercive);

    HvpSource f = {HVP_SOURCE_KIND_GAUSSIAN, {0.5, 0.5, 0.0}, 0.01, 1.0};
    HvpFemSolution *sol = NULL;
    HvpStatus s = hvp_fem_solve(d, &p, 1.0 / 16.0, &f, &sol);
    if (s != HVP_STATUS_OK) {
        char msg[256];
        hvp_last_error_message(msg, sizeof msg);
        fprintf(stderr, "solve failed (%d): %s\n", s, msg);
        hvp_domain_free(d);
        return 2;
    }
    HvpSolveInfo info;
    hvp_fem_solution_info(sol, &info);
    const double x[3] = {0.5, 0.5, 0.0};
    double re, im;
    hvp_fem_solution_eval(sol, x, &re, &im);
    printf("dofs=%zu residual=%.2e u(0.5,0.5)=%.6f%+.6fi\n", info.n_dofs, info.relative_residual, re, im);

    hvp_fem_solution_free(sol);
    hvp_domain_free(d);
    return 0;
}
