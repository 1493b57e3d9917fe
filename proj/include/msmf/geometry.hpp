#pragma once

// Analytic test manifolds with exact differential-geometric oracles.
//
// Circle, Sphere and Torus live in the leading 2 or 3 coordinates of R^D and
// are zero in the remaining ones. The Fermat quartic is the affine complex
// curve x^4 + y^4 = 1 in C^2 = R^4, coordinates (Re x, Im x, Re y, Im y);
// sampling and volume refer to its compact patch |x| <= 1, |y| <= 1, while
// projection is onto the whole curve.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "msmf/error.hpp"
#include "msmf/point_cloud.hpp"
#include "msmf/rng.hpp"

namespace msmf {

enum class ManifoldKind { Circle, Sphere, Torus, FermatQuartic };

/// Orthonormal frame of T_xM and its orthogonal complement.
struct TangentFrame {
  Vector base;
  std::vector<Vector> tangent;
  std::vector<Vector> normal;
};

namespace detail {

using Complex = std::complex<double>;

// Fermat quartic: f(x, y) = x^4 + y^4 - 1 split into real and imaginary parts.
struct QuarticJet {
  Eigen::Vector2d value;                 // (Re f, Im f)
  Eigen::Matrix<double, 2, 4> jacobian;  // rows: grad Re f, grad Im f
  Eigen::Matrix4d hess_re;
  Eigen::Matrix4d hess_im;
};

inline QuarticJet quartic_jet(const Eigen::Ref<const Vector>& p) {
  const Complex x(p[0], p[1]);
  const Complex y(p[2], p[3]);
  const Complex f = x * x * x * x + y * y * y * y - 1.0;
  const Complex fx = 4.0 * x * x * x;
  const Complex fy = 4.0 * y * y * y;
  const Complex fxx = 12.0 * x * x;
  const Complex fyy = 12.0 * y * y;
  QuarticJet jet;
  jet.value = {f.real(), f.imag()};
  // Cauchy-Riemann: d/d(Re z) = h', d/d(Im z) = i h'.
  jet.jacobian << fx.real(), -fx.imag(), fy.real(), -fy.imag(),  //
      fx.imag(), fx.real(), fy.imag(), fy.real();
  jet.hess_re.setZero();
  jet.hess_im.setZero();
  auto block = [](Eigen::Matrix4d& h, int o, Complex c, bool imag) {
    if (!imag) {
      h(o, o) = c.real();
      h(o, o + 1) = h(o + 1, o) = -c.imag();
      h(o + 1, o + 1) = -c.real();
    } else {
      h(o, o) = c.imag();
      h(o, o + 1) = h(o + 1, o) = c.real();
      h(o + 1, o + 1) = -c.imag();
    }
  };
  block(jet.hess_re, 0, fxx, false);
  block(jet.hess_re, 2, fyy, false);
  block(jet.hess_im, 0, fxx, true);
  block(jet.hess_im, 2, fyy, true);
  return jet;
}

// Area of the patch |x| <= 1, |y| <= 1 by a polar midpoint rule in the x-disk
// over the sheet |x| <= |y| (area element 1 + |x/y|^6), times 4 branches and 2
// symmetric sheets.
inline double quartic_patch_area() {
  constexpr int nr = 1600;
  constexpr int na = 1600;
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double rho = (i + 0.5) / nr;
    double ring = 0.0;
    for (int j = 0; j < na; ++j) {
      const double a = 2.0 * std::numbers::pi * (j + 0.5) / na;
      const Complex x = std::polar(rho, a);
      const double ay = std::pow(std::abs(1.0 - x * x * x * x), 0.25);
      if (rho <= ay && ay <= 1.0) ring += 1.0 + std::pow(rho / ay, 6);
    }
    total += ring * rho;
  }
  return 8.0 * total * (1.0 / nr) * (2.0 * std::numbers::pi / na);
}

}  // namespace detail

class AnalyticManifold {
 public:
  /// Circle of the given radius in the (x1, x2) plane of R^D, D >= 2.
  static AnalyticManifold circle(double radius, int ambient_dim = 2) {
    if (!(radius > 0.0)) throw DomainError("circle radius must be positive");
    if (ambient_dim < 2) throw DomainError("circle needs ambient dimension >= 2");
    return AnalyticManifold(ManifoldKind::Circle, 1, ambient_dim, radius, 0.0);
  }

  /// Round 2-sphere in the leading three coordinates of R^D, D >= 3.
  static AnalyticManifold sphere(double radius, int ambient_dim = 3) {
    if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
    if (ambient_dim < 3) throw DomainError("sphere needs ambient dimension >= 3");
    return AnalyticManifold(ManifoldKind::Sphere, 2, ambient_dim, radius, 0.0);
  }

  /// Torus of revolution about the x3 axis, D >= 3.
  static AnalyticManifold torus(double major = 2.0, double minor = 1.0, int ambient_dim = 3) {
    if (!(major > minor && minor > 0.0))
      throw DomainError("torus needs major > minor > 0");
    if (ambient_dim < 3) throw DomainError("torus needs ambient dimension >= 3");
    return AnalyticManifold(ManifoldKind::Torus, 2, ambient_dim, major, minor);
  }

  static AnalyticManifold fermat_quartic() {
    return AnalyticManifold(ManifoldKind::FermatQuartic, 2, 4, 0.0, 0.0);
  }

  ManifoldKind kind() const noexcept { return kind_; }
  int intrinsic_dim() const noexcept { return intrinsic_dim_; }
  int ambient_dim() const noexcept { return ambient_dim_; }
  int codim() const noexcept { return ambient_dim_ - intrinsic_dim_; }
  double radius() const noexcept { return a_; }
  double major_radius() const noexcept { return a_; }
  double minor_radius() const noexcept { return b_; }

  bool has_curvature_oracle() const noexcept { return kind_ != ManifoldKind::FermatQuartic; }

  std::string name() const {
    switch (kind_) {
      case ManifoldKind::Circle: return "circle(R=" + format_double(a_) + ")";
      case ManifoldKind::Sphere: return "sphere(R=" + format_double(a_) + ")";
      case ManifoldKind::Torus:
        return "torus(R=" + format_double(a_) + ";r=" + format_double(b_) + ")";
      case ManifoldKind::FermatQuartic: return "quartic";
    }
    return "unknown";
  }

  /// Reach. For the quartic this is 1 / max ||II||_op over the patch
  /// (max normal curvature ~2.523, located numerically), rounded down.
  double reach() const noexcept {
    switch (kind_) {
      case ManifoldKind::Circle:
      case ManifoldKind::Sphere: return a_;
      case ManifoldKind::Torus: return std::min(b_, a_ - b_);
      case ManifoldKind::FermatQuartic: return 0.39;
    }
    return 0.0;
  }

  double volume() const {
    switch (kind_) {
      case ManifoldKind::Circle: return 2.0 * std::numbers::pi * a_;
      case ManifoldKind::Sphere: return 4.0 * std::numbers::pi * a_ * a_;
      case ManifoldKind::Torus: return 4.0 * std::numbers::pi * std::numbers::pi * a_ * b_;
      case ManifoldKind::FermatQuartic: {
        static const double area = detail::quartic_patch_area();
        return area;
      }
    }
    return 0.0;
  }

  /// Distance-like residual of the defining equations (0 on M).
  double constraint_residual(const Eigen::Ref<const Vector>& x) const {
    check_dim(x);
    switch (kind_) {
      case ManifoldKind::Circle: return std::abs(x.head(2).norm() - a_) + x.tail(ambient_dim_ - 2).norm();
      case ManifoldKind::Sphere: return std::abs(x.head(3).norm() - a_) + x.tail(ambient_dim_ - 3).norm();
      case ManifoldKind::Torus: {
        const double rho = x.head(2).norm();
        return std::abs(std::hypot(rho - a_, x[2]) - b_) + x.tail(ambient_dim_ - 3).norm();
      }
      case ManifoldKind::FermatQuartic: return detail::quartic_jet(x).value.norm();
    }
    return 0.0;
  }

  // -------------------------------------------------------------------------
  // Parametrizations (Circle: theta; Sphere: polar, azimuth; Torus: tube
  // angle theta, revolution angle phi).
  // -------------------------------------------------------------------------

  Vector embed(std::span<const double> params) const {
    Vector x = Vector::Zero(ambient_dim_);
    switch (kind_) {
      case ManifoldKind::Circle:
        x[0] = a_ * std::cos(params[0]);
        x[1] = a_ * std::sin(params[0]);
        break;
      case ManifoldKind::Sphere:
        x[0] = a_ * std::sin(params[0]) * std::cos(params[1]);
        x[1] = a_ * std::sin(params[0]) * std::sin(params[1]);
        x[2] = a_ * std::cos(params[0]);
        break;
      case ManifoldKind::Torus: {
        const double ring = a_ + b_ * std::cos(params[0]);
        x[0] = ring * std::cos(params[1]);
        x[1] = ring * std::sin(params[1]);
        x[2] = b_ * std::sin(params[0]);
        break;
      }
      case ManifoldKind::FermatQuartic:
        throw Unsupported("the Fermat quartic has no global parametrization");
    }
    return x;
  }

  // -------------------------------------------------------------------------
  // Projection
  // -------------------------------------------------------------------------

  /// Nearest point of M. Throws DegenerateProjection on the focal set.
  Vector project(const Eigen::Ref<const Vector>& z) const {
    check_dim(z);
    Vector p = Vector::Zero(ambient_dim_);
    switch (kind_) {
      case ManifoldKind::Circle:
      case ManifoldKind::Sphere: {
        const int k = kind_ == ManifoldKind::Circle ? 2 : 3;
        const double n = z.head(k).norm();
        if (n <= kFocalTolerance * a_)
          throw DegenerateProjection("point is at the center; every point of M is nearest");
        p.head(k) = (a_ / n) * z.head(k);
        return p;
      }
      case ManifoldKind::Torus: {
        const double rho = z.head(2).norm();
        if (rho <= kFocalTolerance * a_)
          throw DegenerateProjection("point is on the axis of revolution");
        const Eigen::Vector2d core = (a_ / rho) * z.head(2);
        Eigen::Vector3d w(z[0] - core[0], z[1] - core[1], z[2]);
        const double wn = w.norm();
        if (wn <= kFocalTolerance * b_)
          throw DegenerateProjection("point is on the core circle of the torus");
        p.head(2) = core + (b_ / wn) * w.head(2);
        p[2] = b_ * w[2] / wn;
        return p;
      }
      case ManifoldKind::FermatQuartic: return project_quartic(z);
    }
    return p;
  }

  // -------------------------------------------------------------------------
  // Curvature
  // -------------------------------------------------------------------------

  /// Principal curvatures of the codimension-one embedding surface, signed so
  /// that positive means bending away from the outward normal.
  std::vector<double> principal_curvatures(const Eigen::Ref<const Vector>& x) const {
    require_on_manifold(x);
    switch (kind_) {
      case ManifoldKind::Circle: return {1.0 / a_};
      case ManifoldKind::Sphere: return {1.0 / a_, 1.0 / a_};
      case ManifoldKind::Torus: {
        const double rho = x.head(2).norm();
        const double cos_theta = (rho - a_) / b_;
        return {1.0 / b_, cos_theta / rho};
      }
      case ManifoldKind::FermatQuartic:
        throw Unsupported("curvature oracle not available for the Fermat quartic");
    }
    return {};
  }

  /// Outward unit normal inside the 2- or 3-dimensional carrier subspace.
  Vector outward_normal(const Eigen::Ref<const Vector>& x) const {
    require_on_manifold(x);
    Vector n = Vector::Zero(ambient_dim_);
    switch (kind_) {
      case ManifoldKind::Circle: n.head(2) = x.head(2) / x.head(2).norm(); break;
      case ManifoldKind::Sphere: n.head(3) = x.head(3) / x.head(3).norm(); break;
      case ManifoldKind::Torus: {
        const double rho = x.head(2).norm();
        n.head(2) = ((rho - a_) / (b_ * rho)) * x.head(2);
        n[2] = x[2] / b_;
        n.normalize();
        break;
      }
      case ManifoldKind::FermatQuartic:
        throw Unsupported("curvature oracle not available for the Fermat quartic");
    }
    return n;
  }

  /// Mean curvature vector H = (1/d) tr II at a point of M.
  Vector mean_curvature_vector(const Eigen::Ref<const Vector>& x) const {
    if (kind_ == ManifoldKind::FermatQuartic)
      throw Unsupported("mean curvature not available for the Fermat quartic");
    const auto kappa = principal_curvatures(x);
    double mean = 0.0;
    for (double k : kappa) mean += k;
    mean /= static_cast<double>(kappa.size());
    return -mean * outward_normal(x);
  }

  /// Operator norm of the second fundamental form at x.
  double second_fundamental_form_norm(const Eigen::Ref<const Vector>& x) const {
    const auto kappa = principal_curvatures(x);
    double m = 0.0;
    for (double k : kappa) m = std::max(m, std::abs(k));
    return m;
  }

  /// det(I_d - <v_y, II_{pi(y)}>) for y in the tube.
  double shape_determinant(const Eigen::Ref<const Vector>& y) const {
    if (kind_ == ManifoldKind::FermatQuartic)
      throw Unsupported("shape determinant not available for the Fermat quartic");
    const Vector p = project(y);
    const Vector v = y - p;
    if (v.norm() >= reach())
      throw OutOfTube("distance " + format_double(v.norm()) + " to M is not below the reach " +
                      format_double(reach()));
    const double offset = v.dot(outward_normal(p));
    double det = 1.0;
    for (double k : principal_curvatures(p)) det *= 1.0 + offset * k;
    return det;
  }

  // -------------------------------------------------------------------------
  // Frames
  // -------------------------------------------------------------------------

  TangentFrame tangent_frame(const Eigen::Ref<const Vector>& x) const {
    require_on_manifold(x);
    TangentFrame frame;
    frame.base = x;
    const int D = ambient_dim_;
    auto unit = [D](int i) {
      Vector e = Vector::Zero(D);
      e[i] = 1.0;
      return e;
    };
    switch (kind_) {
      case ManifoldKind::Circle: {
        Vector t = Vector::Zero(D);
        t[0] = -x[1];
        t[1] = x[0];
        frame.tangent.push_back(t.normalized());
        frame.normal.push_back(outward_normal(x));
        for (int i = 2; i < D; ++i) frame.normal.push_back(unit(i));
        break;
      }
      case ManifoldKind::Sphere: {
        const Vector n = outward_normal(x);
        frame.normal.push_back(n);
        for (int i = 0; i < 3 && frame.tangent.size() < 2; ++i) {
          Vector e = unit(i) - n[i] * n;
          for (const auto& t : frame.tangent) e -= t.dot(e) * t;
          if (e.norm() > 1e-6) frame.tangent.push_back(e.normalized());
        }
        for (int i = 3; i < D; ++i) frame.normal.push_back(unit(i));
        break;
      }
      case ManifoldKind::Torus: {
        const double rho = x.head(2).norm();
        const double cos_phi = x[0] / rho, sin_phi = x[1] / rho;
        const double cos_theta = (rho - a_) / b_, sin_theta = x[2] / b_;
        Vector t_theta = Vector::Zero(D), t_phi = Vector::Zero(D);
        t_theta << -sin_theta * cos_phi, -sin_theta * sin_phi, cos_theta, Vector::Zero(D - 3);
        t_phi << -sin_phi, cos_phi, 0.0, Vector::Zero(D - 3);
        frame.tangent = {t_theta.normalized(), t_phi};
        frame.normal.push_back(outward_normal(x));
        for (int i = 3; i < D; ++i) frame.normal.push_back(unit(i));
        break;
      }
      case ManifoldKind::FermatQuartic: {
        // Orthonormal basis of span{grad Re f, grad Im f} and its complement.
        const auto jet = detail::quartic_jet(x);
        Eigen::Matrix4d basis = Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>>(
                                    jet.jacobian.transpose())
                                    .householderQ();
        frame.normal = {basis.col(0), basis.col(1)};
        frame.tangent = {basis.col(2), basis.col(3)};
        break;
      }
    }
    return frame;
  }

  /// Uniformly distributed unit vector in the normal space at x.
  Vector random_unit_normal(const Eigen::Ref<const Vector>& x, CounterRng& rng) const {
    const TangentFrame frame = tangent_frame(x);
    Vector u = Vector::Zero(ambient_dim_);
    double n2 = 0.0;
    do {
      u.setZero();
      for (const auto& nv : frame.normal) u += rng.normal() * nv;
      n2 = u.squaredNorm();
    } while (n2 < 1e-24);
    return u / std::sqrt(n2);
  }

  // -------------------------------------------------------------------------
  // Sampling
  // -------------------------------------------------------------------------

  /// One point uniform with respect to the induced volume measure.
  Vector sample(CounterRng& rng) const {
    Vector x = Vector::Zero(ambient_dim_);
    switch (kind_) {
      case ManifoldKind::Circle: {
        const double t = 2.0 * std::numbers::pi * rng.uniform();
        x[0] = a_ * std::cos(t);
        x[1] = a_ * std::sin(t);
        return x;
      }
      case ManifoldKind::Sphere: {
        Eigen::Vector3d g;
        do {
          g = {rng.normal(), rng.normal(), rng.normal()};
        } while (g.squaredNorm() < 1e-24);
        x.head(3) = (a_ / g.norm()) * g;
        return x;
      }
      case ManifoldKind::Torus: {
        // Area element b (a + b cos theta), bounded by b (a + b).
        for (;;) {
          const double theta = 2.0 * std::numbers::pi * rng.uniform();
          const double phi = 2.0 * std::numbers::pi * rng.uniform();
          if (rng.uniform() * (a_ + b_) < a_ + b_ * std::cos(theta)) {
            const double params[2] = {theta, phi};
            return embed(params);
          }
        }
      }
      case ManifoldKind::FermatQuartic: return sample_quartic(rng);
    }
    return x;
  }

 private:
  static constexpr double kFocalTolerance = 1e-12;
  static constexpr double kOnManifoldTolerance = 1e-8;

  AnalyticManifold(ManifoldKind kind, int d, int D, double a, double b)
      : kind_(kind), intrinsic_dim_(d), ambient_dim_(D), a_(a), b_(b) {}

  void check_dim(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != ambient_dim_)
      throw DomainError("point has " + std::to_string(x.size()) + " coordinates, manifold lives in R^" +
                        std::to_string(ambient_dim_));
  }

  void require_on_manifold(const Eigen::Ref<const Vector>& x) const {
    const double res = constraint_residual(x);
    if (!(res <= kOnManifoldTolerance * std::max(1.0, a_)))
      throw DomainError("point is not on the manifold (residual " + format_double(res) + ")");
  }

  // Sheet |x| <= |y|: propose x uniform in the unit disk and a branch
  // y = zeta (1 - x^4)^(1/4); accept with probability (1 + |x/y|^6) / 2;
  // swap x and y with probability 1/2 to cover the sheet |x| > |y|.
  Vector sample_quartic(CounterRng& rng) const {
    using detail::Complex;
    static constexpr Complex branches[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (;;) {
      const double rho = std::sqrt(rng.uniform());
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      const Complex x = std::polar(rho, angle);
      const auto branch = static_cast<int>(rng() >> 62);
      const Complex y = branches[branch] * std::pow(1.0 - x * x * x * x, 0.25);
      const double ay = std::abs(y);
      const double accept = rng.uniform();
      const bool swap = rng.uniform() < 0.5;
      if (!(rho <= ay && ay <= 1.0)) continue;
      if (2.0 * accept >= 1.0 + std::pow(rho / ay, 6)) continue;
      const Complex u = swap ? y : x;
      const Complex w = swap ? x : y;
      Vector p(4);
      p << u.real(), u.imag(), w.real(), w.imag();
      return p;
    }
  }

  // Lagrange-Newton on min |p - z|^2 / 2 subject to Re f = Im f = 0.
  Vector project_quartic(const Eigen::Ref<const Vector>& z) const {
    constexpr int kMaxIterations = 100;
    constexpr double kConstraintTol = 1e-10;
    constexpr double kStationarityTol = 1e-8;

    Vector p = z;
    int iter = 0;
    // Feasibility phase: Gauss-Newton onto the constraint set from the query.
    for (; iter < kMaxIterations; ++iter) {
      const auto jet = detail::quartic_jet(p);
      if (jet.value.norm() < 1e-13) break;
      const Eigen::Matrix2d jjt = jet.jacobian * jet.jacobian.transpose();
      p -= jet.jacobian.transpose() * jjt.ldlt().solve(jet.value);
    }
    auto jet = detail::quartic_jet(p);
    Eigen::Vector2d lambda =
        -(jet.jacobian * jet.jacobian.transpose()).ldlt().solve(jet.jacobian * (p - z));

    for (; iter < kMaxIterations; ++iter) {
      jet = detail::quartic_jet(p);
      const Vector stationarity = (p - z) + jet.jacobian.transpose() * lambda;
      if (jet.value.norm() < kConstraintTol && stationarity.norm() < kStationarityTol) return p;
      Eigen::Matrix<double, 6, 6> kkt = Eigen::Matrix<double, 6, 6>::Zero();
      kkt.topLeftCorner<4, 4>() =
          Eigen::Matrix4d::Identity() + lambda[0] * jet.hess_re + lambda[1] * jet.hess_im;
      kkt.topRightCorner<4, 2>() = jet.jacobian.transpose();
      kkt.bottomLeftCorner<2, 4>() = jet.jacobian;
      Eigen::Matrix<double, 6, 1> rhs;
      rhs << -stationarity, -jet.value;
      const Eigen::Matrix<double, 6, 1> step = kkt.fullPivLu().solve(rhs);
      p += step.head<4>();
      lambda += step.tail<2>();
    }
    jet = detail::quartic_jet(p);
    const Vector stationarity = (p - z) + jet.jacobian.transpose() * lambda;
    if (jet.value.norm() < kConstraintTol && stationarity.norm() < kStationarityTol) return p;
    throw DegenerateProjection("Lagrange-Newton projection onto the quartic did not converge");
  }

  ManifoldKind kind_;
  int intrinsic_dim_;
  int ambient_dim_;
  double a_;  // radius or major radius
  double b_;  // minor radius
};

}  // namespace msmf
