/* Solves a small regression through the C API and prints the error path. */
#include <stdio.h>

#include "sketchls.h"

#define N 64
#define D 3

int main(void) {
  double x[N * D];
  double y[N];
  unsigned s = 12345u;
  for (int i = 0; i < N; i++) {
    double acc = 0.0;
    for (int j = 0; j < D; j++) {
      s = s * 1103515245u + 12345u;
      x[i * D + j] = (double)((s >> 8) % 2000) / 1000.0 - 1.0;
      acc += (j + 1) * x[i * D + j];
    }
    y[i] = acc;
  }

  SlsMatrix *m = NULL;
  if (sls_matrix_new(N, D, x, &m) != SLS_STATUS_OK) {
    fprintf(stderr, "matrix: %s\n", sls_last_error());
    return 1;
  }

  double beta[D];
  if (sls_full_ls(m, y, N, beta, D) != SLS_STATUS_OK) {
    fprintf(stderr, "full_ls: %s\n", sls_last_error());
    return 1;
  }
  printf("full %.12f %.12f %.12f\n", beta[0], beta[1], beta[2]);

  double lambda = 0.0;
  sls_lambda_rule(m, SLS_LAMBDA_RULE_CONCENTRATED, 0.0, &lambda);
  SlsTrace *t = NULL;
  if (sls_aopt_ihs_solve(m, y, N, 16, 10, lambda, &t) != SLS_STATUS_OK) {
    fprintf(stderr, "solve: %s\n", sls_last_error());
    return 1;
  }
  size_t iters = sls_trace_iterations(t);
  double f = 0.0, e = 0.0;
  sls_trace_errors(t, iters, &f, &e);
  printf("aopt-ihs iterations %zu dist %.3e\n", iters, e);
  sls_trace_free(t);

  SlsStatus st = sls_full_ls(m, y, N - 1, beta, D);
  printf("mismatch status %d: %s\n", (int)st, sls_last_error());

  sls_matrix_free(m);
  printf("version %s\n", sls_version());
  return 0;
}
