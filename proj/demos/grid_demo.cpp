// Fits a 5x5 grid of Gaussian blobs with k-means, k-means-C' and isotropic EM
// and prints how close the free energy gets to the likelihood for each.

#include <cstdio>

#include <tvem/tvem.hpp>

int main() {
  tvem::GeneratorSpec spec;  // 25 clusters, 100 points each
  spec.seed = 1;
  const tvem::Dataset data = tvem::generate(spec);

  std::printf("%-16s %8s %6s %12s %12s %12s %10s\n", "algorithm", "restart", "iters", "F", "L", "gap", "sigma2");
  for (std::size_t c_prime : {1u, 2u, 25u}) {
    tvem::RunConfig config;
    config.algorithm = c_prime == 1 ? tvem::Algorithm::kmeans : tvem::Algorithm::kmeans_cprime;
    if (c_prime > 1) config.c_prime = c_prime;
    config.c = 25;
    config.seed = 7;
    const auto outcomes = tvem::run_restarts(data, config, 4);
    for (const auto& o : outcomes) {
      const auto& last = o.result->trace.back();
      char name[32];
      std::snprintf(name, sizeof(name), c_prime == 1 ? "kmeans" : "kmeans-C'=%zu", c_prime);
      std::printf("%-16s %8zu %6zu %12.6f %12.6f %12.3e %10.4f\n", name, o.index, o.result->iterations(), last.F, last.L,
                  last.gap, last.sigma2);
    }
  }
  return 0;
}
