#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfdg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vec3 = Eigen::Vector3d;

// Error taxonomy; the CLI maps these to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {  // bad input/config (exit 2)
  using Error::Error;
};
struct SolveError : Error {  // numerical failure: inconsistent constraints, singular solve (exit 3)
  using Error::Error;
};
struct CheckError : Error {  // a --check assertion did not hold (exit 4)
  using Error::Error;
};

// Portable uniform double in [0,1) from a 64-bit generator. The standard
// distributions are implementation-defined, which would break byte-identical
// outputs across toolchains.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Worker-thread cap from PFDG_THREADS (>=1); defaults to 1 when unset or invalid.
int worker_threads();

// Runs fn(i) for i in [0,n). Serial unless worker_threads() > 1; results must
// be written to disjoint slots so the schedule never affects the outcome.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace pfdg
