#include "rfm/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace rfm {

namespace {

bool is_half_plane(ModelKind k) { return k == ModelKind::Hyperbolic || k == ModelKind::Trumpet; }

std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Euclidean: return "euclidean";
    case ModelKind::Circle: return "circle";
    case ModelKind::Sphere: return "sphere";
    case ModelKind::Torus: return "torus";
    case ModelKind::Cylinder: return "cylinder";
    case ModelKind::Hyperbolic: return "hyperbolic";
    case ModelKind::Trumpet: return "trumpet";
  }
  return "unknown";
}

// Wrapped coordinate difference b - a for the flat models.
Eigen::VectorXd flat_delta(ModelKind k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd d = b - a;
  switch (k) {
    case ModelKind::Circle:
      d[0] = wrap_difference(d[0]);
      break;
    case ModelKind::Torus:
      d[0] = wrap_difference(d[0]);
      d[1] = wrap_difference(d[1]);
      break;
    case ModelKind::Cylinder:
      d[0] = wrap_difference(d[0]);
      break;
    default:
      break;
  }
  return d;
}

// 2 asinh(|z - w| / (2 sqrt(y_z y_w))): the arcosh form without cancellation
// near the diagonal.
double half_plane_distance(double dx, double dy, double ya, double yb) {
  return 2.0 * std::asinh(std::hypot(dx, dy) / (2.0 * std::sqrt(ya * yb)));
}

Eigen::Vector3d sphere_vec(const ManifoldPoint& p) { return p.coords.head<3>(); }

double sphere_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

Manifold Manifold::euclidean(int dim) {
  if (dim < 1) throw DomainError("euclidean: dimension must be >= 1");
  return Manifold(ModelKind::Euclidean, dim);
}
Manifold Manifold::circle() { return Manifold(ModelKind::Circle, 1); }
Manifold Manifold::sphere() { return Manifold(ModelKind::Sphere, 2); }
Manifold Manifold::torus() { return Manifold(ModelKind::Torus, 2); }
Manifold Manifold::cylinder() { return Manifold(ModelKind::Cylinder, 2); }
Manifold Manifold::hyperbolic() { return Manifold(ModelKind::Hyperbolic, 2); }
Manifold Manifold::trumpet() { return Manifold(ModelKind::Trumpet, 2); }

Manifold Manifold::from_name(std::string_view name, int dim) {
  if (name == "euclidean") return euclidean(dim > 0 ? dim : 2);
  Manifold m = [&] {
    if (name == "circle") return circle();
    if (name == "sphere") return sphere();
    if (name == "torus") return torus();
    if (name == "cylinder") return cylinder();
    if (name == "hyperbolic") return hyperbolic();
    if (name == "trumpet") return trumpet();
    throw DomainError("unknown model '" + std::string(name) + "'");
  }();
  if (dim > 0 && dim != m.dim()) {
    throw DomainError("model '" + std::string(name) + "' has dimension " + std::to_string(m.dim()));
  }
  return m;
}

double Manifold::curvature() const {
  switch (kind_) {
    case ModelKind::Sphere: return 1.0;
    case ModelKind::Hyperbolic:
    case ModelKind::Trumpet: return -1.0;
    default: return 0.0;
  }
}

bool Manifold::is_compact() const {
  return kind_ == ModelKind::Circle || kind_ == ModelKind::Sphere || kind_ == ModelKind::Torus;
}

std::string Manifold::name() const { return kind_name(kind_); }

void Manifold::require_same(const Manifold& other) const {
  if (!(*this == other)) {
    throw ModelMismatchError("model mismatch: " + name() + " vs " + other.name());
  }
}

ManifoldPoint Manifold::point(std::initializer_list<double> coords) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) v[i++] = c;
  return point(std::move(v));
}

ManifoldPoint Manifold::point(Eigen::VectorXd c) const {
  if (c.size() != ambient_dim()) {
    throw DomainError(name() + ": expected " + std::to_string(ambient_dim()) + " coordinates, got " +
                      std::to_string(c.size()));
  }
  if (!c.allFinite()) throw DomainError(name() + ": non-finite coordinate");
  switch (kind_) {
    case ModelKind::Circle:
      c[0] = reduce_angle(c[0]);
      break;
    case ModelKind::Torus:
      c[0] = reduce_angle(c[0]);
      c[1] = reduce_angle(c[1]);
      break;
    case ModelKind::Cylinder:
      c[0] = reduce_angle(c[0]);
      break;
    case ModelKind::Trumpet:
      c[0] = reduce_angle(c[0]);
      [[fallthrough]];
    case ModelKind::Hyperbolic:
      if (!(c[1] > 0)) throw DomainError(name() + ": y must be positive");
      break;
    case ModelKind::Sphere: {
      const double n = c.norm();
      if (std::abs(n - 1.0) > 1e-6) throw DomainError("sphere: point must have unit norm");
      if (std::abs(n - 1.0) > 1e-12) c /= n;
      break;
    }
    case ModelKind::Euclidean:
      break;
  }
  return ManifoldPoint{kind_, std::move(c)};
}

void Manifold::check_model(const ManifoldPoint& p) const {
  if (p.model != kind_ || p.coords.size() != ambient_dim()) {
    throw ModelMismatchError("point belongs to " + kind_name(p.model) + " with " +
                             std::to_string(p.coords.size()) + " coordinates, not " + name());
  }
}

void Manifold::validate(const ManifoldPoint& p) const {
  if (p.model != kind_) {
    throw ModelMismatchError("point belongs to " + kind_name(p.model) + ", not " + name());
  }
  if (p.coords.size() != ambient_dim()) throw ModelMismatchError(name() + ": coordinate count mismatch");
  if (!p.coords.allFinite()) throw DomainError(name() + ": non-finite coordinate");
  if (is_half_plane(kind_) && !(p.coords[1] > 0)) throw DomainError(name() + ": y must be positive");
  if (kind_ == ModelKind::Sphere && std::abs(p.coords.norm() - 1.0) > 1e-9) {
    throw DomainError("sphere: point off the unit sphere");
  }
}

double Manifold::distance(const ManifoldPoint& a, const ManifoldPoint& b) const {
  check_model(a);
  check_model(b);
  switch (kind_) {
    case ModelKind::Euclidean: return (a.coords - b.coords).norm();
    case ModelKind::Circle: return std::abs(wrap_difference(a.coords[0] - b.coords[0]));
    case ModelKind::Torus:
      return std::hypot(wrap_difference(a.coords[0] - b.coords[0]),
                        wrap_difference(a.coords[1] - b.coords[1]));
    case ModelKind::Cylinder:
      return std::hypot(wrap_difference(a.coords[0] - b.coords[0]), a.coords[1] - b.coords[1]);
    case ModelKind::Sphere: return sphere_angle(sphere_vec(a), sphere_vec(b));
    case ModelKind::Hyperbolic:
      return half_plane_distance(a.coords[0] - b.coords[0], a.coords[1] - b.coords[1], a.coords[1],
                                 b.coords[1]);
    case ModelKind::Trumpet:
      // Distance grows with |dx|, so the minimum over lifts w + 2k pi is the
      // lift with the wrapped difference.
      return half_plane_distance(wrap_difference(a.coords[0] - b.coords[0]),
                                 a.coords[1] - b.coords[1], a.coords[1], b.coords[1]);
  }
  return 0;
}

Eigen::MatrixXd Manifold::frame(const ManifoldPoint& base) const {
  if (kind_ != ModelKind::Sphere) return Eigen::MatrixXd::Identity(dim_, dim_);
  const Eigen::Vector3d b = sphere_vec(base);
  Eigen::Vector3d ref = std::abs(b.x()) > 0.9 ? Eigen::Vector3d::UnitY() : Eigen::Vector3d::UnitX();
  Eigen::Vector3d e1 = (ref - ref.dot(b) * b).normalized();
  Eigen::Vector3d e2 = b.cross(e1);
  Eigen::MatrixXd f(3, 2);
  f.col(0) = e1;
  f.col(1) = e2;
  return f;
}

Eigen::VectorXd Manifold::to_frame(const TangentVector& v) const {
  if (kind_ != ModelKind::Sphere) return v.components;
  return frame(v.base).transpose() * v.components;
}

TangentVector Manifold::from_frame(const ManifoldPoint& base, const Eigen::VectorXd& v) const {
  if (kind_ != ModelKind::Sphere) return {base, v};
  return {base, frame(base) * v};
}

ManifoldPoint Manifold::exp_map(const TangentVector& v) const {
  validate(v.base);
  if (v.components.size() != ambient_dim()) throw DomainError(name() + ": tangent size mismatch");
  if (kind_ == ModelKind::Sphere) {
    const Eigen::Vector3d b = sphere_vec(v.base);
    const Eigen::Vector3d w = v.components.head<3>();
    if (std::abs(w.dot(b)) > 1e-10) throw DomainError("sphere: tangent vector not orthogonal to base");
    const double t = w.norm();
    if (t == 0) return v.base;
    Eigen::Vector3d q = std::cos(t) * b + std::sin(t) * (w / t);
    q.normalize();
    return ManifoldPoint{kind_, q};
  }
  return exp_frame(v.base, v.components);
}

ManifoldPoint Manifold::exp_frame(const ManifoldPoint& base, const Eigen::VectorXd& v) const {
  check_model(base);
  if (v.size() != dim_) throw DomainError(name() + ": frame vector size mismatch");
  switch (kind_) {
    case ModelKind::Euclidean:
    case ModelKind::Circle:
    case ModelKind::Torus:
    case ModelKind::Cylinder:
      return point(base.coords + v);
    case ModelKind::Sphere: {
      const Eigen::Vector3d w = frame(base) * v;
      const double t = w.norm();
      if (t == 0) return base;
      Eigen::Vector3d q = std::cos(t) * sphere_vec(base) + std::sin(t) * (w / t);
      q.normalize();
      return ManifoldPoint{kind_, q};
    }
    case ModelKind::Hyperbolic:
    case ModelKind::Trumpet: {
      const double t = v.norm();
      if (t == 0) return base;
      // Move to i by z -> (z - x) / y, follow the geodesic i e^s rotated so
      // its initial velocity is v / t, then move back.
      const double a = v[0] / t;
      const double b = v[1] / t;
      const double theta = std::atan2(-a, b);
      const double c = std::cos(0.5 * theta);
      const double s = std::sin(0.5 * theta);
      const std::complex<double> w(0.0, std::exp(t));
      const std::complex<double> r = (c * w + s) / (-s * w + c);
      const double x = base.coords[0] + base.coords[1] * r.real();
      const double y = base.coords[1] * r.imag();
      if (!(y > 0)) throw DomainError(name() + ": geodesic left floating-point range");
      Eigen::VectorXd out(2);
      out << x, y;
      return point(std::move(out));
    }
  }
  return base;
}

Eigen::VectorXd Manifold::log_frame(const ManifoldPoint& base, const ManifoldPoint& q) const {
  check_model(base);
  check_model(q);
  switch (kind_) {
    case ModelKind::Euclidean:
    case ModelKind::Circle:
    case ModelKind::Torus:
    case ModelKind::Cylinder:
      return flat_delta(kind_, base.coords, q.coords);
    case ModelKind::Sphere: {
      const Eigen::Vector3d b = sphere_vec(base);
      const Eigen::Vector3d p = sphere_vec(q);
      const double angle = sphere_angle(b, p);
      Eigen::Vector3d dir = p - b.dot(p) * b;
      const double n = dir.norm();
      const Eigen::MatrixXd f = frame(base);
      if (angle == 0) return Eigen::VectorXd::Zero(2);
      if (n < 1e-300) return angle * Eigen::Vector2d::UnitX();
      return f.transpose() * (angle / n * dir);
    }
    case ModelKind::Hyperbolic:
    case ModelKind::Trumpet: {
      const double x = base.coords[0];
      const double y = base.coords[1];
      double dx = q.coords[0] - x;
      if (kind_ == ModelKind::Trumpet) dx = wrap_difference(dx);
      const double yw = q.coords[1];
      const double dy = yw - y;
      const double d = half_plane_distance(dx, dy, y, yw);
      if (d == 0) return Eigen::VectorXd::Zero(2);
      // Frame components of grad d_q at base are y * (dA/dx, dA/dy) / sinh d
      // with A = 1 + |z - w|^2 / (2 y y_w); log is -d times that gradient.
      const double r2 = dx * dx + dy * dy;
      Eigen::VectorXd g(2);
      g << -dx / yw, -dy / yw - r2 / (2.0 * y * yw);
      return -(d / std::sinh(d)) * g;
    }
  }
  return {};
}

double Manifold::injectivity_radius(const ManifoldPoint& p) const {
  validate(p);
  switch (kind_) {
    case ModelKind::Euclidean:
    case ModelKind::Hyperbolic: return kInfinity;
    case ModelKind::Trumpet: return std::asinh(kPi / p.coords[1]);
    default: return kPi;
  }
}

double Manifold::tangent_cut_time(const TangentVector& u) const {
  validate(u.base);
  if (u.components.size() != ambient_dim()) throw DomainError(name() + ": tangent size mismatch");
  if (std::abs(u.components.norm() - 1.0) > 1e-12) {
    throw DomainError(name() + ": tangent_cut_time needs a unit vector");
  }
  if (kind_ == ModelKind::Sphere && std::abs(u.components.dot(u.base.coords)) > 1e-12) {
    throw DomainError("sphere: tangent vector not orthogonal to base");
  }
  const Eigen::VectorXd& c = u.components;
  auto ratio = [](double comp) { return comp == 0 ? kInfinity : kPi / std::abs(comp); };
  switch (kind_) {
    case ModelKind::Euclidean:
    case ModelKind::Hyperbolic: return kInfinity;
    case ModelKind::Circle:
    case ModelKind::Sphere: return kPi;
    case ModelKind::Torus: return std::min(ratio(c[0]), ratio(c[1]));
    case ModelKind::Cylinder: return ratio(c[0]);
    case ModelKind::Trumpet: break;
  }

  // Trumpet. The lifted geodesic is a half-circle (or vertical line) that is
  // monotone in x and reaches x_p + sign(a) * y (1 + b) / |a| in the limit; it
  // stops minimizing once its x-offset reaches pi, if ever.
  const double a = c[0];
  const double b = c[1];
  const double y = u.base.coords[1];
  if (a == 0 || y * (1.0 + b) / std::abs(a) <= kPi) return kInfinity;

  auto deficit = [&](double t) {
    return distance(u.base, exp_frame(u.base, t * c)) - t;
  };
  auto minimizing = [&](double t) { return deficit(t) > -1e-12 * std::max(1.0, t); };
  double lo = 0;
  double hi = 0.1;
  int grow = 0;
  while (minimizing(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 80) return kInfinity;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (minimizing(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CutLocusSet Manifold::cut_locus(const ManifoldPoint& p) const {
  validate(p);
  using C = CutLocusSet::Component;
  using S = CutLocusSet::Shape;
  switch (kind_) {
    case ModelKind::Euclidean:
    case ModelKind::Hyperbolic: return CutLocusSet(*this);
    case ModelKind::Circle:
      return CutLocusSet(*this, {C{S::Point, point({p.coords[0] + kPi}), 0, 0}});
    case ModelKind::Sphere: return CutLocusSet(*this, {C{S::Point, ManifoldPoint{kind_, -p.coords}, 0, 0}});
    case ModelKind::Torus:
      return CutLocusSet(*this, {C{S::VerticalLine, {}, reduce_angle(p.coords[0] + kPi), 0},
                                 C{S::HorizontalLine, {}, reduce_angle(p.coords[1] + kPi), 0}});
    case ModelKind::Cylinder:
    case ModelKind::Trumpet:
      return CutLocusSet(*this, {C{S::VerticalLine, {}, reduce_angle(p.coords[0] + kPi), 0}});
  }
  return CutLocusSet(*this);
}

CutLocusSet Manifold::cut_locus_of_ball(const ManifoldPoint& p, double r) const {
  if (!(r > 0)) throw DomainError("cut_locus_of_ball: radius must be positive");
  CutLocusSet base = cut_locus(p);
  std::vector<CutLocusSet::Component> parts = base.components();
  // Each component moves rigidly with the ball point, so the union is the
  // component swept over the ball's extent in the relevant coordinate.
  double extent = r;
  if (kind_ == ModelKind::Trumpet) {
    // B(iy, r) is the Euclidean disc about x + i y cosh r of radius y sinh r.
    extent = p.coords[1] * std::sinh(r);
  }
  for (auto& c : parts) c.halfwidth = std::min(extent, kPi);
  return CutLocusSet(*this, std::move(parts));
}

double Manifold::distance_to_cut(const ManifoldPoint& p, const ManifoldPoint& q) const {
  check_model(p);
  check_model(q);
  switch (kind_) {
    case ModelKind::Euclidean:
    case ModelKind::Hyperbolic: return kInfinity;
    case ModelKind::Circle:
    case ModelKind::Sphere: return std::max(0.0, kPi - distance(p, q));
    case ModelKind::Torus:
      return std::min(kPi - std::abs(wrap_difference(q.coords[0] - p.coords[0])),
                      kPi - std::abs(wrap_difference(q.coords[1] - p.coords[1])));
    case ModelKind::Cylinder: return kPi - std::abs(wrap_difference(q.coords[0] - p.coords[0]));
    case ModelKind::Trumpet:
      return hyperbolic_distance_to_vertical(kPi - std::abs(wrap_difference(q.coords[0] - p.coords[0])),
                                             q.coords[1]);
  }
  return kInfinity;
}

TangentVector Manifold::grad_sq_dist(const ManifoldPoint& q, const ManifoldPoint& p) const {
  return from_frame(q, grad_sq_dist_frame(q, p));
}

Eigen::VectorXd Manifold::grad_sq_dist_frame(const ManifoldPoint& q, const ManifoldPoint& p) const {
  if (on_cut_locus(p, q)) {
    throw CutLocusError(name() + ": d^2(., p) is not differentiable on Cut(p)", q.coords);
  }
  return -2.0 * log_frame(q, p);
}

Eigen::MatrixXd Manifold::hess_sq_dist(const ManifoldPoint& q, const ManifoldPoint& p) const {
  if (on_cut_locus(p, q)) {
    throw CutLocusError(name() + ": d^2(., p) is not twice differentiable on Cut(p)", q.coords);
  }
  const Eigen::VectorXd v = log_frame(q, p);
  const double d = v.norm();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim_, dim_);
  if (d == 0 || dim_ == 1) return 2.0 * id;
  // Radial eigenvalue 2; tangential 2 d cot d, 2, or 2 d coth d by curvature.
  double tangential = 2.0;
  const double k = curvature();
  if (d > 1e-8) {
    if (k > 0) tangential = 2.0 * d / std::tan(d);
    if (k < 0) tangential = 2.0 * d / std::tanh(d);
  }
  const Eigen::VectorXd u = v / d;
  const Eigen::MatrixXd radial = u * u.transpose();
  return 2.0 * radial + tangential * (id - radial);
}

ManifoldPoint Manifold::ball_point(const ManifoldPoint& center, double radius,
                                   const Eigen::VectorXd& dir) const {
  return exp_frame(center, radius * dir);
}

ManifoldPoint Manifold::sample_ball(const ManifoldPoint& center, double radius,
                                    CounterRng& rng) const {
  if (!(radius > 0)) throw DomainError("sample_ball: radius must be positive");
  if (dim_ == 1) {
    Eigen::VectorXd v(1);
    v[0] = radius * (2.0 * rng.uniform() - 1.0);
    return exp_frame(center, v);
  }
  if (dim_ == 2) {
    const double u = rng.uniform();
    const double phi = kTwoPi * rng.uniform();
    double rho = 0;
    const double k = curvature();
    if (k > 0) {
      rho = std::acos(1.0 - u * (1.0 - std::cos(radius)));
    } else if (k < 0) {
      rho = std::acosh(1.0 + u * (std::cosh(radius) - 1.0));
    } else {
      rho = radius * std::sqrt(u);
    }
    Eigen::VectorXd v(2);
    v << rho * std::cos(phi), rho * std::sin(phi);
    return exp_frame(center, v);
  }
  // Euclidean R^m, m >= 3.
  Eigen::VectorXd dir(dim_);
  for (int i = 0; i < dim_; ++i) dir[i] = rng.normal();
  const double rho = radius * std::pow(rng.uniform(), 1.0 / dim_);
  return exp_frame(center, rho * dir.normalized());
}

// ---------------------------------------------------------------------------

double CutLocusSet::distance_to_component(const Component& c, const ManifoldPoint& q) const {
  switch (c.shape) {
    case Shape::Point:
      return std::max(0.0, model_.distance(c.anchor, q) - c.halfwidth);
    case Shape::VerticalLine: {
      const double e = std::max(0.0, std::abs(wrap_difference(q.coords[0] - c.position)) - c.halfwidth);
      if (model_.kind() == ModelKind::Trumpet) return hyperbolic_distance_to_vertical(e, q.coords[1]);
      return e;
    }
    case Shape::HorizontalLine:
      return std::max(0.0, std::abs(wrap_difference(q.coords[1] - c.position)) - c.halfwidth);
  }
  return kInfinity;
}

double CutLocusSet::distance_to(const ManifoldPoint& q) const {
  model_.check_model(q);
  double best = kInfinity;
  for (const auto& c : parts_) best = std::min(best, distance_to_component(c, q));
  if (best == kInfinity) return best;
  return std::max(0.0, best - metric_radius_);
}

CutLocusSet CutLocusSet::thickened(double r) const {
  if (!(r >= 0)) throw DomainError("thickened: radius must be nonnegative");
  return CutLocusSet(model_, parts_, metric_radius_ + r);
}

double CutLocusSet::x_halfwidth_at(const Component& c, double y) const {
  double extra = metric_radius_;
  if (model_.kind() == ModelKind::Trumpet) extra = y * std::sinh(metric_radius_);
  return std::min(kPi, c.halfwidth + extra);
}

std::string CutLocusSet::describe() const {
  std::ostringstream os;
  if (parts_.empty()) return "empty";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const auto& c = parts_[i];
    if (i) os << " U ";
    switch (c.shape) {
      case Shape::Point:
        os << "ball(" << c.anchor.coords.transpose() << "; " << c.halfwidth << ")";
        break;
      case Shape::VerticalLine:
        os << "{|x - " << c.position << "| <= " << c.halfwidth << "}";
        break;
      case Shape::HorizontalLine:
        os << "{|y - " << c.position << "| <= " << c.halfwidth << "}";
        break;
    }
  }
  if (metric_radius_ > 0) os << " thickened by " << metric_radius_;
  return os.str();
}

// ---------------------------------------------------------------------------

NormalChart::NormalChart(Manifold model, ManifoldPoint center, double radius)
    : model_(model), center_(std::move(center)), radius_(radius) {
  model_.validate(center_);
  if (!(radius_ > 0)) throw DomainError("normal chart: radius must be positive");
  const double inj = model_.injectivity_radius(center_);
  if (!(radius_ < inj)) {
    throw DomainError("normal chart: radius " + std::to_string(radius_) +
                      " not below the injectivity radius " + std::to_string(inj));
  }
}

ChartVector log_map(const NormalChart& chart, const ManifoldPoint& q) {
  const Manifold& m = chart.model();
  if (m.on_cut_locus(chart.center(), q)) {
    throw CutLocusError("log_map: point lies on the cut locus of the chart center", q.coords);
  }
  const double d = m.distance(chart.center(), q);
  if (d >= chart.radius()) {
    throw CutLocusError("log_map: point at distance " + std::to_string(d) + " outside chart radius " +
                            std::to_string(chart.radius()),
                        q.coords);
  }
  return ChartVector{m.log_frame(chart.center(), q)};
}

}  // namespace rfm
