#include "hosc/model.hpp"

#include <cmath>
#include <string>

#include "hosc/errors.hpp"

namespace hosc {

OscillatorySystem::OscillatorySystem(std::size_t n, std::size_t m, double epsilon)
    : n_(n), m_(m), epsilon_(epsilon) {
  if (n == 0 || m > n) {
    throw NumericalError(ErrorKind::InvalidArgument, "need 0 <= m <= n and n >= 1");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw NumericalError(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1]");
  }
}

Vector OscillatorySystem::slow_gradient(std::span<const double> x) const {
  Vector g(n_);
  eval_slow_gradient(x, g);
  return g;
}

Vector OscillatorySystem::stiff_gradient(std::span<const double> x) const {
  Vector g(n_);
  eval_stiff_gradient(x, g);
  return g;
}

namespace {

double kinetic_energy(const OscillatorySystem& sys, std::span<const double> x,
                      std::span<const double> y) {
  const Vector v = solve_spd(sys.mass(x), y);
  return 0.5 * dot(y, v);
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw NumericalError(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
  }
}

constexpr double kMinSpringLength = 1e-8;

double checked_length(double dx, double dy, int spring) {
  const double r = std::sqrt(dx * dx + dy * dy);
  if (r < kMinSpringLength) {
    throw NumericalError(ErrorKind::DomainViolation,
                         "spring " + std::to_string(spring) + " collapsed to zero length");
  }
  return r;
}

// Hessian block of 1/2 a^2 (|d| - l)^2 with respect to d = (dx, dy):
// a^2 [ (1 - e/r) u u^T + (e/r) I ].
struct SpringBlock {
  double xx, xy, yy;
};

SpringBlock spring_block(double a, double l, double dx, double dy, int spring) {
  const double r = checked_length(dx, dy, spring);
  const double e = r - l;
  const double ux = dx / r;
  const double uy = dy / r;
  const double shrink = e / r;
  const double a2 = a * a;
  return {a2 * ((1.0 - shrink) * ux * ux + shrink), a2 * ((1.0 - shrink) * ux * uy),
          a2 * ((1.0 - shrink) * uy * uy + shrink)};
}

// Example system written out component by component. SpringChain below is
// the loop form; the two are kept independent so that each checks the other.
class DoublePendulum final : public OscillatorySystem {
 public:
  DoublePendulum(double epsilon, double a1, double a2, double l1, double l2)
      : OscillatorySystem(4, 2, epsilon), a1_(a1), a2_(a2), l1_(l1), l2_(l2) {}

 protected:
  SymMatrix eval_mass(std::span<const double>) const override { return SymMatrix::identity(4); }

  double eval_slow_potential(std::span<const double> x) const override { return x[1] + x[3]; }

  void eval_slow_gradient(std::span<const double>, std::span<double> out) const override {
    out[0] = 0.0;
    out[1] = 1.0;
    out[2] = 0.0;
    out[3] = 1.0;
  }

  double eval_stiff_potential(std::span<const double> x) const override {
    const double r1 = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    const double dx = x[2] - x[0];
    const double dy = x[3] - x[1];
    const double r2 = std::sqrt(dx * dx + dy * dy);
    const double e1 = r1 - l1_;
    const double e2 = r2 - l2_;
    return 0.5 * a1_ * a1_ * e1 * e1 + 0.5 * a2_ * a2_ * e2 * e2;
  }

  void eval_stiff_gradient(std::span<const double> x, std::span<double> out) const override {
    const double r1 = checked_length(x[0], x[1], 1);
    const double dx = x[2] - x[0];
    const double dy = x[3] - x[1];
    const double r2 = checked_length(dx, dy, 2);
    const double f1 = a1_ * a1_ * (r1 - l1_) / r1;
    const double f2 = a2_ * a2_ * (r2 - l2_) / r2;
    const double g1x = f1 * x[0];
    const double g1y = f1 * x[1];
    const double g2x = f2 * dx;
    const double g2y = f2 * dy;
    out[0] = g1x - g2x;
    out[1] = g1y - g2y;
    out[2] = g2x;
    out[3] = g2y;
  }

  SymMatrix eval_stiff_hessian(std::span<const double> x) const override {
    const SpringBlock h1 = spring_block(a1_, l1_, x[0], x[1], 1);
    const SpringBlock h2 = spring_block(a2_, l2_, x[2] - x[0], x[3] - x[1], 2);
    SymMatrix h(4);
    h(0, 0) = h1.xx + h2.xx;
    h(1, 0) = h1.xy + h2.xy;
    h(1, 1) = h1.yy + h2.yy;
    h(2, 2) = h2.xx;
    h(3, 2) = h2.xy;
    h(3, 3) = h2.yy;
    h(2, 0) = -h2.xx;
    h(2, 1) = -h2.xy;
    h(3, 0) = -h2.xy;
    h(3, 1) = -h2.yy;
    return h;
  }

  Vector eval_constraints(std::span<const double> x) const override {
    const double r1 = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    const double dx = x[2] - x[0];
    const double dy = x[3] - x[1];
    const double r2 = std::sqrt(dx * dx + dy * dy);
    return {r1 - l1_, r2 - l2_};
  }

  Matrix eval_constraint_jacobian(std::span<const double> x) const override {
    const double r1 = checked_length(x[0], x[1], 1);
    const double dx = x[2] - x[0];
    const double dy = x[3] - x[1];
    const double r2 = checked_length(dx, dy, 2);
    Matrix g(2, 4);
    g(0, 0) = x[0] / r1;
    g(0, 1) = x[1] / r1;
    g(1, 0) = -(dx / r2);
    g(1, 1) = -(dy / r2);
    g(1, 2) = dx / r2;
    g(1, 3) = dy / r2;
    return g;
  }

 private:
  double a1_, a2_, l1_, l2_;
};

class SpringChain final : public OscillatorySystem {
 public:
  SpringChain(std::size_t springs, double epsilon, std::span<const double> alphas,
              std::span<const double> lengths)
      : OscillatorySystem(2 * springs, springs, epsilon),
        alphas_(alphas.begin(), alphas.end()),
        lengths_(lengths.begin(), lengths.end()) {}

 protected:
  SymMatrix eval_mass(std::span<const double>) const override { return SymMatrix::identity(dim()); }

  double eval_slow_potential(std::span<const double> x) const override {
    double u = 0.0;
    for (std::size_t k = 0; k < springs(); ++k) u += x[2 * k + 1];
    return u;
  }

  void eval_slow_gradient(std::span<const double>, std::span<double> out) const override {
    for (std::size_t k = 0; k < springs(); ++k) {
      out[2 * k] = 0.0;
      out[2 * k + 1] = 1.0;
    }
  }

  double eval_stiff_potential(std::span<const double> x) const override {
    double v = 0.0;
    for (std::size_t k = 0; k < springs(); ++k) {
      const auto [dx, dy] = link(x, k);
      const double e = std::sqrt(dx * dx + dy * dy) - lengths_[k];
      v += 0.5 * alphas_[k] * alphas_[k] * e * e;
    }
    return v;
  }

  void eval_stiff_gradient(std::span<const double> x, std::span<double> out) const override {
    for (double& o : out) o = 0.0;
    for (std::size_t k = 0; k < springs(); ++k) {
      const auto [dx, dy] = link(x, k);
      const double r = checked_length(dx, dy, static_cast<int>(k + 1));
      const double f = alphas_[k] * alphas_[k] * (r - lengths_[k]) / r;
      const double gx = f * dx;
      const double gy = f * dy;
      out[2 * k] += gx;
      out[2 * k + 1] += gy;
      if (k > 0) {
        out[2 * k - 2] -= gx;
        out[2 * k - 1] -= gy;
      }
    }
  }

  SymMatrix eval_stiff_hessian(std::span<const double> x) const override {
    SymMatrix h(dim());
    for (std::size_t k = 0; k < springs(); ++k) {
      const auto [dx, dy] = link(x, k);
      const SpringBlock b = spring_block(alphas_[k], lengths_[k], dx, dy, static_cast<int>(k + 1));
      const std::size_t c = 2 * k;
      h(c, c) += b.xx;
      h(c + 1, c) += b.xy;
      h(c + 1, c + 1) += b.yy;
      if (k > 0) {
        const std::size_t p = c - 2;
        h(p, p) += b.xx;
        h(p + 1, p) += b.xy;
        h(p + 1, p + 1) += b.yy;
        h(c, p) -= b.xx;
        h(c, p + 1) -= b.xy;
        h(c + 1, p) -= b.xy;
        h(c + 1, p + 1) -= b.yy;
      }
    }
    return h;
  }

  Vector eval_constraints(std::span<const double> x) const override {
    Vector g(springs());
    for (std::size_t k = 0; k < springs(); ++k) {
      const auto [dx, dy] = link(x, k);
      g[k] = std::sqrt(dx * dx + dy * dy) - lengths_[k];
    }
    return g;
  }

  Matrix eval_constraint_jacobian(std::span<const double> x) const override {
    Matrix g(springs(), dim());
    for (std::size_t k = 0; k < springs(); ++k) {
      const auto [dx, dy] = link(x, k);
      const double r = checked_length(dx, dy, static_cast<int>(k + 1));
      g(k, 2 * k) = dx / r;
      g(k, 2 * k + 1) = dy / r;
      if (k > 0) {
        g(k, 2 * k - 2) = -(dx / r);
        g(k, 2 * k - 1) = -(dy / r);
      }
    }
    return g;
  }

 private:
  std::size_t springs() const noexcept { return alphas_.size(); }

  // Spring k joins bob k-1 (the origin for k = 0) to bob k.
  static std::pair<double, double> link(std::span<const double> x, std::size_t k) {
    if (k == 0) return {x[0], x[1]};
    return {x[2 * k] - x[2 * k - 2], x[2 * k + 1] - x[2 * k - 1]};
  }

  Vector alphas_;
  Vector lengths_;
};

}  // namespace

double hamiltonian(const OscillatorySystem& sys, const State& s) {
  const double eps = sys.epsilon();
  return kinetic_energy(sys, s.x, s.y) + sys.slow_potential(s.x) +
         sys.stiff_potential(s.x) / (eps * eps);
}

std::pair<Vector, Vector> rhs_full(const OscillatorySystem& sys, const State& s) {
  const std::size_t n = sys.dim();
  const double inv_eps2 = 1.0 / (sys.epsilon() * sys.epsilon());
  Vector xdot = solve_spd(sys.mass(s.x), s.y);
  Vector ydot(n);
  const Vector gu = sys.slow_gradient(s.x);
  const Vector gv = sys.stiff_gradient(s.x);
  for (std::size_t i = 0; i < n; ++i) ydot[i] = -gu[i] - inv_eps2 * gv[i];

  if (!sys.mass_is_constant()) {
    // d/dx of the kinetic energy at fixed y, by central differences.
    constexpr double step = 1e-6;
    Vector xp = s.x;
    for (std::size_t i = 0; i < n; ++i) {
      xp[i] = s.x[i] + step;
      const double tp = kinetic_energy(sys, xp, s.y);
      xp[i] = s.x[i] - step;
      const double tm = kinetic_energy(sys, xp, s.y);
      xp[i] = s.x[i];
      ydot[i] -= (tp - tm) / (2.0 * step);
    }
  }
  return {std::move(xdot), std::move(ydot)};
}

SystemPtr make_double_pendulum(double epsilon, double alpha1, double alpha2, double l1,
                               double l2) {
  require_positive(alpha1, "alpha1");
  require_positive(alpha2, "alpha2");
  require_positive(l1, "l1");
  require_positive(l2, "l2");
  return std::make_shared<DoublePendulum>(epsilon, alpha1, alpha2, l1, l2);
}

SystemPtr make_spring_chain(std::size_t springs, double epsilon, std::span<const double> alphas,
                            std::span<const double> lengths) {
  if (springs == 0) throw NumericalError(ErrorKind::InvalidArgument, "chain needs a spring");
  if (alphas.size() != springs || lengths.size() != springs) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "chain needs one alpha and one length per spring");
  }
  for (double a : alphas) require_positive(a, "alpha");
  for (double l : lengths) require_positive(l, "length");
  return std::make_shared<SpringChain>(springs, epsilon, alphas, lengths);
}

State double_pendulum_initial_state(double epsilon) {
  return State{{std::sqrt(0.5), -std::sqrt(0.5), std::sqrt(2.0), 5.0 * epsilon},
               {0.0, 0.0, 0.0, 0.0},
               0.0};
}

}  // namespace hosc
