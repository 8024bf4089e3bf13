#include "dtzo/types.hpp"

#include <stdexcept>

namespace dtzo {

void Dims::validate() const {
  if (d1 < 1 || d2 < 1 || d3 < 1 || n_workers < 1)
    throw std::invalid_argument("Dims: all fields must be >= 1");
}

SystemState SystemState::zeros(const Dims& dims) {
  dims.validate();
  SystemState s;
  s.x1.assign(dims.n_workers, Vec(dims.d1, 0.0));
  s.x2.assign(dims.n_workers, Vec(dims.d2, 0.0));
  s.x3.assign(dims.n_workers, Vec(dims.d3, 0.0));
  s.z1.assign(dims.d1, 0.0);
  s.z2.assign(dims.d2, 0.0);
  s.z3.assign(dims.d3, 0.0);
  return s;
}

void SystemState::check(const Dims& dims) const {
  auto bad = [](const char* w) {
    throw std::runtime_error(std::string("SystemState: ") + w);
  };
  std::size_t n = static_cast<std::size_t>(dims.n_workers);
  if (x1.size() != n || x2.size() != n || x3.size() != n)
    bad("worker block count mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    require_size(x1[j], dims.d1, "x1");
    require_size(x2[j], dims.d2, "x2");
    require_size(x3[j], dims.d3, "x3");
    if (!all_finite(x1[j]) || !all_finite(x2[j]) || !all_finite(x3[j]))
      bad("non-finite worker block");
  }
  require_size(z1, dims.d1, "z1");
  require_size(z2, dims.d2, "z2");
  require_size(z3, dims.d3, "z3");
  if (!all_finite(z1) || !all_finite(z2) || !all_finite(z3))
    bad("non-finite consensus block");
  if (t < 0) bad("negative iteration");
}

Oracle::Oracle(int level, int worker, Fn f, GradFn g)
    : level_(level),
      worker_(worker),
      fn_(std::move(f)),
      grad_(std::move(g)),
      count_(std::make_shared<std::atomic<std::int64_t>>(0)) {}

double Oracle::eval(const Vec& x1, const Vec& x2, const Vec& x3) const {
  if (!fn_) throw std::runtime_error("Oracle: empty evaluator");
  count_->fetch_add(1, std::memory_order_relaxed);
  return fn_(x1, x2, x3);
}

std::array<Vec, 3> Oracle::gradient(const Vec& x1, const Vec& x2,
                                    const Vec& x3) const {
  if (!grad_)
    throw std::runtime_error(
        "Oracle: gradient requested but no white-box gradient available");
  return grad_(x1, x2, x3);
}

}  // namespace dtzo
