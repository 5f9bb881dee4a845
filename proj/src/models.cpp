#include "bect/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bect/smoothstep.hpp"
#include "json.hpp"

namespace bect {

using nlohmann::json;

// ---------------------------------------------------------------------------
// FourierFunction
// ---------------------------------------------------------------------------

Complex FourierFunction::coeff(int k1, int k2) const {
  auto it = coeffs.find({k1, k2});
  return it == coeffs.end() ? Complex(0, 0) : it->second;
}

void FourierFunction::set(int k1, int k2, Complex v) {
  if (v == Complex(0, 0))
    coeffs.erase({k1, k2});
  else
    coeffs[{k1, k2}] = v;
}

int FourierFunction::support_radius() const {
  int r = 0;
  for (const auto& [k, v] : coeffs) r = std::max({r, std::abs(k.first), std::abs(k.second)});
  return r;
}

Complex FourierFunction::eval(double y1, double y2) const {
  Complex acc(0, 0);
  for (const auto& [k, v] : coeffs)
    acc += v * std::exp(Complex(0, kTwoPi * (k.first * y1 + k.second * y2)));
  return acc;
}

double FourierFunction::reality_defect() const {
  double d = 0;
  for (const auto& [k, v] : coeffs)
    d = std::max(d, std::abs(v - std::conj(coeff(-k.first, -k.second))));
  return d;
}

// ---------------------------------------------------------------------------
// ContinuousModel
// ---------------------------------------------------------------------------

std::string to_string(ContinuousKind k) {
  switch (k) {
    case ContinuousKind::MagneticSchrodinger: return "magnetic-schrodinger";
    case ContinuousKind::DivergenceForm: return "divergence-form";
    case ContinuousKind::GeneralSecondOrder: return "general-second-order";
  }
  return "?";
}

ContinuousKind continuous_kind_from_string(const std::string& s) {
  if (s == "magnetic-schrodinger") return ContinuousKind::MagneticSchrodinger;
  if (s == "divergence-form") return ContinuousKind::DivergenceForm;
  if (s == "general-second-order") return ContinuousKind::GeneralSecondOrder;
  throw ConfigError("unknown continuous model kind: " + s);
}

namespace {

const FourierFunction& empty_fn() {
  static const FourierFunction f{};
  return f;
}

std::vector<std::string> coefficient_names(ContinuousKind kind) {
  switch (kind) {
    case ContinuousKind::MagneticSchrodinger: return {"V", "A1", "A2"};
    // A zeroth-order term V is allowed alongside sigma so that constant
    // barriers stay inside the class.
    case ContinuousKind::DivergenceForm: return {"s11", "s12", "s21", "s22", "V"};
    case ContinuousKind::GeneralSecondOrder:
      return {"a00", "a10", "a01", "a20", "a11", "a02"};
  }
  return {};
}

}  // namespace

const FourierFunction& ContinuousModel::fn(const std::string& name) const {
  auto it = fns.find(name);
  return it == fns.end() ? empty_fn() : it->second;
}

int ContinuousModel::support_radius() const {
  int r = 0;
  for (const auto& [name, f] : fns) r = std::max(r, f.support_radius());
  return r;
}

void ContinuousModel::validate() {
  const auto names = coefficient_names(kind);
  for (const auto& [name, f] : fns)
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ConfigError("coefficient '" + name + "' not valid for kind " + to_string(kind));

  const double tol = 1e-12;
  if (kind == ContinuousKind::MagneticSchrodinger) {
    for (const char* n : {"V", "A1", "A2"})
      if (fn(n).reality_defect() > tol)
        throw ConfigError(std::string("coefficient ") + n + " must be real-valued");
  } else if (kind == ContinuousKind::DivergenceForm) {
    // sigma(y) Hermitian-valued: s11, s22 real and s21 = conj(s12).
    for (const char* n : {"s11", "s22", "V"})
      if (fn(n).reality_defect() > tol)
        throw ConfigError(std::string("coefficient ") + n + " must be real-valued");
    const auto& s12 = fn("s12");
    const auto& s21 = fn("s21");
    std::set<LatticeVector> keys;
    for (const auto& [k, v] : s12.coeffs) keys.insert(k);
    for (const auto& [k, v] : s21.coeffs) keys.insert(k);
    for (const auto& k : keys)
      if (std::abs(s21.coeff(k.first, k.second) -
                   std::conj(s12.coeff(-k.first, -k.second))) > tol)
        throw ConfigError("sigma must be Hermitian-valued: s21(k) = conj(s12(-k))");
  }

  // Principal-part ellipticity on a probe grid of unit directions.
  const int ny = 16, na = 32;
  double c = 1e300;
  for (int iy1 = 0; iy1 < ny; ++iy1)
    for (int iy2 = 0; iy2 < ny; ++iy2) {
      const double y1 = double(iy1) / ny, y2 = double(iy2) / ny;
      for (int ia = 0; ia < na; ++ia) {
        const double th = kTwoPi * ia / na;
        const double x1 = std::cos(th), x2 = std::sin(th);
        double p = 0;
        switch (kind) {
          case ContinuousKind::MagneticSchrodinger:
            p = 1.0;  // principal part is -Delta
            break;
          case ContinuousKind::DivergenceForm:
            p = std::real(fn("s11").eval(y1, y2) * x1 * x1 +
                          (fn("s12").eval(y1, y2) + fn("s21").eval(y1, y2)) * x1 * x2 +
                          fn("s22").eval(y1, y2) * x2 * x2);
            break;
          case ContinuousKind::GeneralSecondOrder:
            p = std::real(fn("a20").eval(y1, y2) * x1 * x1 +
                          fn("a11").eval(y1, y2) * x1 * x2 +
                          fn("a02").eval(y1, y2) * x2 * x2);
            break;
        }
        c = std::min(c, p);
      }
    }
  ellipticity = c;
  if (!(c > 0)) throw ConfigError("model is not elliptic: principal part min = " + std::to_string(c));
}

// ---------------------------------------------------------------------------
// MatrixModel
// ---------------------------------------------------------------------------

void MatrixModel::validate() const {
  if (dim <= 0) throw ConfigError("matrix model dimension must be positive");
  for (const auto& [r, T] : hoppings) {
    if (T.rows() != dim || T.cols() != dim)
      throw ConfigError("hopping block size does not match model dimension");
    auto it = hoppings.find({-r.first, -r.second});
    if (it == hoppings.end() || (it->second - T.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw ConfigError("hoppings must satisfy T(-r) = T(r)^dagger");
  }
}

int MatrixModel::r1_range() const {
  int r = 0;
  for (const auto& [k, T] : hoppings) r = std::max(r, std::abs(k.first));
  return r;
}

int MatrixModel::r2_range() const {
  int r = 0;
  for (const auto& [k, T] : hoppings) r = std::max(r, std::abs(k.second));
  return r;
}

ComplexMatrix MatrixModel::symbol(const Vec2& xi) const {
  const double x1 = wrap_two_pi(xi[0]), x2 = wrap_two_pi(xi[1]);
  ComplexMatrix H = ComplexMatrix::Zero(dim, dim);
  for (const auto& [r, T] : hoppings)
    H += T * std::exp(Complex(0, r.first * x1 + r.second * x2));
  return 0.5 * (H + H.adjoint().eval());
}

MatrixModel MatrixModel::scalar_barrier(int dim, double c) {
  MatrixModel m;
  m.dim = dim;
  m.hoppings[{0, 0}] = c * ComplexMatrix::Identity(dim, dim);
  return m;
}

// ---------------------------------------------------------------------------
// AppendixModel
// ---------------------------------------------------------------------------

double AppendixModel::window(double xi1) const {
  const double a = std::fabs(wrap_pi(xi1));
  if (a <= plateau_end) return 1.0;
  if (a >= support_end) return 0.0;
  return 1.0 - smoothstep(window_order, (a - plateau_end) / (support_end - plateau_end));
}

double AppendixModel::alpha(double xi1) const {
  const double x = wrap_pi(xi1);
  const double w = window(x);
  return x * w + std::sin(x) * (1.0 - w);
}

double AppendixModel::beta(double xi1) const { return 1.0 - window(xi1); }

Eigen::Matrix2cd AppendixModel::symbol(const Vec2& xi) const {
  const double x1 = xi[0], x2 = wrap_two_pi(xi[1]);
  const double a = alpha(x1), b = beta(x1);
  const Complex ph = std::exp(Complex(0, nu * x2));
  Eigen::Matrix2cd M;
  M(0, 0) = a;
  M(1, 1) = -a;
  M(0, 1) = b + epsilon * std::conj(ph);
  M(1, 0) = b + epsilon * ph;
  return M;
}

double AppendixModel::min_gap(int probe_n) const {
  double g2 = 1e300;
  for (int i = 0; i < probe_n; ++i) {
    const double x1 = kTwoPi * i / probe_n;
    const double a = alpha(x1), b = beta(x1);
    for (int j = 0; j < probe_n; ++j) {
      const double x2 = kTwoPi * j / probe_n;
      const Complex z = b + epsilon * std::exp(Complex(0, nu * x2));
      g2 = std::min(g2, a * a + std::norm(z));
    }
  }
  return std::sqrt(g2);
}

void AppendixModel::validate() const {
  if (!(epsilon > 0)) throw ConfigError("appendix model requires epsilon > 0");
  if (window_order < 7 || window_order % 2 == 0)
    throw ConfigError("window order must be an odd integer >= 7");
  if (!(plateau_end > 0 && plateau_end < support_end && support_end < kPi))
    throw ConfigError("window plateau/support must satisfy 0 < plateau < support < pi");
  // beta > 0 strictly off the plateau.
  for (int i = 1; i <= 200; ++i) {
    const double x = plateau_end + (kPi - plateau_end) * i / 200.0;
    if (!(beta(x) > 0)) throw ConfigError("beta must be positive off the plateau");
  }
  const double g = min_gap(256);
  if (!(g > 1e-6))
    throw NumericalError("models", "appendix model gap closed: min sqrt(-det) = " + std::to_string(g));
}

// ---------------------------------------------------------------------------
// Plane-wave assembly
// ---------------------------------------------------------------------------

ComplexMatrix convolution_matrix(const FourierFunction& f, const PlaneWaveBasis& basis) {
  const int n = basis.size();
  ComplexMatrix C = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto [k1, k2] = basis.wave(i);
    for (const auto& [k, v] : f.coeffs) {
      // row index k' = k + column wave: entry <e_{k'}, f e_k> = fhat(k'-k)
      const int j1 = k1 - k.first, j2 = k2 - k.second;
      if (basis.contains(j1, j2)) C(i, basis.index(j1, j2)) = v;
    }
  }
  return C;
}

ComplexMatrix bloch_matrix(const ContinuousModel& model, const Vec2& xi, int K) {
  const int support = model.support_radius();
  if (K < support)
    throw ConfigError("plane-wave truncation K=" + std::to_string(K) +
                      " below coefficient support radius " + std::to_string(support));
  PlaneWaveBasis basis(K);
  const int n = basis.size();

  Eigen::VectorXcd mom1(n), mom2(n);
  for (int i = 0; i < n; ++i) {
    const auto [k1, k2] = basis.wave(i);
    mom1(i) = kTwoPi * k1 + xi[0];
    mom2(i) = kTwoPi * k2 + xi[1];
  }
  auto diag_mul_left = [&](const Eigen::VectorXcd& d, const ComplexMatrix& A) {
    return (d.asDiagonal() * A).eval();
  };

  ComplexMatrix H = ComplexMatrix::Zero(n, n);
  bool hermitian_by_construction = true;
  switch (model.kind) {
    case ContinuousKind::MagneticSchrodinger: {
      for (int j = 0; j < 2; ++j) {
        const auto& mom = (j == 0) ? mom1 : mom2;
        ComplexMatrix Aj = convolution_matrix(model.fn(j == 0 ? "A1" : "A2"), basis);
        Aj += ComplexMatrix(mom.asDiagonal());
        H += Aj * Aj;
      }
      H += convolution_matrix(model.fn("V"), basis);
      break;
    }
    case ContinuousKind::DivergenceForm: {
      const char* names[2][2] = {{"s11", "s12"}, {"s21", "s22"}};
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) {
          ComplexMatrix C = convolution_matrix(model.fn(names[j][l]), basis);
          if (C.isZero(0)) continue;
          const auto& mj = (j == 0) ? mom1 : mom2;
          const auto& ml = (l == 0) ? mom1 : mom2;
          H += diag_mul_left(mj, C) * ml.asDiagonal();
        }
      H += convolution_matrix(model.fn("V"), basis);
      break;
    }
    case ContinuousKind::GeneralSecondOrder: {
      // Operator is taken in its symmetrized (real-part) form below.
      hermitian_by_construction = false;
      struct Term { const char* name; int p1, p2; };
      const Term terms[] = {{"a00", 0, 0}, {"a10", 1, 0}, {"a01", 0, 1},
                            {"a20", 2, 0}, {"a11", 1, 1}, {"a02", 0, 2}};
      for (const auto& t : terms) {
        ComplexMatrix C = convolution_matrix(model.fn(t.name), basis);
        if (C.isZero(0)) continue;
        Eigen::VectorXcd d = Eigen::VectorXcd::Ones(n);
        for (int p = 0; p < t.p1; ++p) d = d.cwiseProduct(mom1);
        for (int p = 0; p < t.p2; ++p) d = d.cwiseProduct(mom2);
        H += C * d.asDiagonal();
      }
      break;
    }
  }

  if (hermitian_by_construction) {
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    const double asym = (H - H.adjoint().eval()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
      throw NumericalError("models", "non-Hermitian assembly residual " + std::to_string(asym) +
                                         " indicates inconsistent coefficients");
  }
  return 0.5 * (H + H.adjoint().eval());
}

// ---------------------------------------------------------------------------
// BlochFamily
// ---------------------------------------------------------------------------

BlochFamily::BlochFamily(MatrixModel m) : model_(std::move(m)) {
  const auto& mm = std::get<MatrixModel>(model_);
  mm.validate();
  dim_ = mm.dim;
}

BlochFamily::BlochFamily(AppendixModel m) : model_(std::move(m)) {
  std::get<AppendixModel>(model_).validate();
  dim_ = 2;
}

BlochFamily::BlochFamily(ContinuousModel m, int K) : model_(std::move(m)), K_(K) {
  auto& cm = std::get<ContinuousModel>(model_);
  cm.validate();
  if (K_ < cm.support_radius())
    throw ConfigError("truncation K below coefficient support radius");
  dim_ = PlaneWaveBasis(K_).size();
}

ComplexMatrix BlochFamily::operator()(const Vec2& xi) const {
  return std::visit(
      [&](const auto& m) -> ComplexMatrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MatrixModel>)
          return m.symbol(xi);
        else if constexpr (std::is_same_v<T, AppendixModel>)
          return m.symbol(xi);
        else
          return bloch_matrix(m, xi, K_);
      },
      model_);
}

// ---------------------------------------------------------------------------
// Gluing
// ---------------------------------------------------------------------------

double GlueProfile::chi_plus(double x2) const {
  if (x2 >= 2.0) return 1.0;
  if (x2 <= 1.0) return 0.0;
  return smoothstep(order, x2 - 1.0);
}
double GlueProfile::chi_minus(double x2) const { return chi_plus(-x2); }
double GlueProfile::chi_zero(double x2) const { return 1.0 - chi_plus(x2) - chi_minus(x2); }

JunctionFamily JunctionFamily::make(BulkModel minus, BulkModel plus, double lambda0) {
  const double c = std::fabs(lambda0) + 2.0;
  BulkModel barrier;
  if (std::holds_alternative<ContinuousModel>(plus)) {
    ContinuousModel b;
    b.kind = std::get<ContinuousModel>(plus).kind;
    b.fns["V"].set(0, 0, c);
    if (b.kind == ContinuousKind::DivergenceForm) {
      b.fns["s11"].set(0, 0, 1.0);
      b.fns["s22"].set(0, 0, 1.0);
    } else if (b.kind == ContinuousKind::GeneralSecondOrder) {
      b.fns.erase("V");
      b.fns["a00"].set(0, 0, c);
      b.fns["a20"].set(0, 0, 1.0);
      b.fns["a02"].set(0, 0, 1.0);
    }
    barrier = std::move(b);
  } else {
    barrier = MatrixModel::scalar_barrier(model_dim(plus), c);
  }
  return make_with_barrier(std::move(minus), std::move(plus), std::move(barrier));
}

JunctionFamily JunctionFamily::make_with_barrier(BulkModel minus, BulkModel plus,
                                                 BulkModel barrier) {
  JunctionFamily j;
  j.minus = std::move(minus);
  j.plus = std::move(plus);
  j.barrier = std::move(barrier);
  return j;
}

namespace {

MatrixModel mix_matrix(const MatrixModel& a, double wa, const MatrixModel& b, double wb,
                       const MatrixModel& c, double wc) {
  if (a.dim != b.dim || a.dim != c.dim)
    throw ConfigError("cannot glue matrix models of different dimension");
  MatrixModel out;
  out.dim = a.dim;
  std::set<LatticeVector> keys;
  for (const auto* m : {&a, &b, &c})
    for (const auto& [r, T] : m->hoppings) keys.insert(r);
  for (const auto& r : keys) {
    ComplexMatrix T = ComplexMatrix::Zero(a.dim, a.dim);
    auto add = [&](const MatrixModel& m, double w) {
      auto it = m.hoppings.find(r);
      if (it != m.hoppings.end() && w != 0.0) T += w * it->second;
    };
    add(a, wa);
    add(b, wb);
    add(c, wc);
    if (T.cwiseAbs().maxCoeff() > 0) out.hoppings[r] = T;
  }
  return out;
}

ContinuousModel mix_continuous(const ContinuousModel& a, double wa, const ContinuousModel& b,
                               double wb, const ContinuousModel& c, double wc) {
  if (a.kind != b.kind || a.kind != c.kind)
    throw ConfigError("cannot glue continuous models of different kind");
  ContinuousModel out;
  out.kind = a.kind;
  std::set<std::string> names;
  for (const auto* m : {&a, &b, &c})
    for (const auto& [n, f] : m->fns) names.insert(n);
  for (const auto& n : names) {
    FourierFunction f;
    std::set<LatticeVector> keys;
    for (const auto* m : {&a, &b, &c})
      for (const auto& [k, v] : m->fn(n).coeffs) keys.insert(k);
    for (const auto& k : keys) {
      const Complex v = wa * a.fn(n).coeff(k.first, k.second) +
                        wb * b.fn(n).coeff(k.first, k.second) +
                        wc * c.fn(n).coeff(k.first, k.second);
      f.set(k.first, k.second, v);
    }
    if (!f.empty()) out.fns[n] = f;
  }
  out.validate();
  return out;
}

}  // namespace

BulkModel glue_family(const JunctionFamily& j, double x2) {
  const double wp = j.profile.chi_plus(x2);
  const double wm = j.profile.chi_minus(x2);
  const double w0 = j.profile.chi_zero(x2);
  if (std::holds_alternative<MatrixModel>(j.plus) && std::holds_alternative<MatrixModel>(j.minus) &&
      std::holds_alternative<MatrixModel>(j.barrier))
    return mix_matrix(std::get<MatrixModel>(j.plus), wp, std::get<MatrixModel>(j.minus), wm,
                      std::get<MatrixModel>(j.barrier), w0);
  if (std::holds_alternative<ContinuousModel>(j.plus) &&
      std::holds_alternative<ContinuousModel>(j.minus) &&
      std::holds_alternative<ContinuousModel>(j.barrier))
    return mix_continuous(std::get<ContinuousModel>(j.plus), wp,
                          std::get<ContinuousModel>(j.minus), wm,
                          std::get<ContinuousModel>(j.barrier), w0);
  throw ConfigError("glue_family: incompatible model kinds (convert appendix models to "
                    "matrix/strip form first)");
}

// ---------------------------------------------------------------------------
// Hopping tables
// ---------------------------------------------------------------------------

int StripHoppings::range() const {
  int r = 0;
  for (int o : offsets) r = std::max(r, std::abs(o));
  return r;
}

StripHoppings hopping_table(const MatrixModel& m) {
  m.validate();
  std::set<int> offs;
  for (const auto& [r, T] : m.hoppings) offs.insert(r.second);
  StripHoppings t;
  t.dim = m.dim;
  t.offsets.assign(offs.begin(), offs.end());
  // capture by value: tables outlive the model they were built from
  t.block = [m](int r2, double zeta) {
    ComplexMatrix T = ComplexMatrix::Zero(m.dim, m.dim);
    for (const auto& [r, B] : m.hoppings)
      if (r.second == r2) T += B * std::exp(Complex(0, r.first * zeta));
    return T;
  };
  return t;
}

StripHoppings hopping_table(const AppendixModel& m) {
  m.validate();
  StripHoppings t;
  t.dim = 2;
  if (m.nu == 0)
    t.offsets = {0};
  else
    t.offsets = {-std::abs(m.nu), 0, std::abs(m.nu)};
  t.block = [m](int r2, double zeta) {
    ComplexMatrix T = ComplexMatrix::Zero(2, 2);
    if (r2 == 0) {
      const double a = m.alpha(zeta), b = m.beta(zeta);
      T(0, 0) = a;
      T(1, 1) = -a;
      T(0, 1) = b;
      T(1, 0) = b;
      if (m.nu == 0) {
        T(0, 1) += m.epsilon;
        T(1, 0) += m.epsilon;
      }
    } else if (r2 == m.nu) {
      T(1, 0) = m.epsilon;
    } else if (r2 == -m.nu) {
      T(0, 1) = m.epsilon;
    }
    return T;
  };
  return t;
}

StripHoppings hopping_table(const BulkModel& m) {
  if (std::holds_alternative<MatrixModel>(m)) return hopping_table(std::get<MatrixModel>(m));
  if (std::holds_alternative<AppendixModel>(m)) return hopping_table(std::get<AppendixModel>(m));
  throw ConfigError("hopping_table: continuous models reduce through the dedicated strip path");
}

// ---------------------------------------------------------------------------
// Real-space blocks
// ---------------------------------------------------------------------------

int RealHoppings::r1_range() const {
  int r = 0;
  for (const auto& [k, T] : blocks) r = std::max(r, std::abs(k.first));
  return r;
}
int RealHoppings::r2_range() const {
  int r = 0;
  for (const auto& [k, T] : blocks) r = std::max(r, std::abs(k.second));
  return r;
}

RealHoppings real_hoppings(const MatrixModel& m) {
  m.validate();
  RealHoppings h;
  h.dim = m.dim;
  h.blocks = m.hoppings;
  return h;
}

RealHoppings real_hoppings(const AppendixModel& m, int r1_max) {
  m.validate();
  RealHoppings h;
  h.dim = 2;

  // Fourier coefficients of the diagonal profile block along xi1.
  const int M = 8192;
  std::vector<double> av(M), bv(M);
  for (int i = 0; i < M; ++i) {
    const double x = kTwoPi * i / M;
    av[i] = m.alpha(x);
    bv[i] = m.beta(x);
  }
  auto fourier = [&](const std::vector<double>& f, int r) {
    Complex acc(0, 0);
    for (int i = 0; i < M; ++i) acc += f[i] * std::exp(Complex(0, -r * kTwoPi * i / M));
    return acc / double(M);
  };
  double tail = 0;
  for (int r = 0; r <= M / 2 - 1; ++r) {
    const Complex a = fourier(av, r), b = fourier(bv, r);
    const double blocknorm = std::abs(a) + std::abs(b);
    if (r > r1_max) {
      tail += (r == 0 ? 1 : 2) * blocknorm;
      continue;
    }
    if (blocknorm < 1e-15) continue;
    ComplexMatrix T(2, 2);
    T(0, 0) = a;
    T(1, 1) = -a;
    T(0, 1) = b;
    T(1, 0) = b;
    h.blocks[{r, 0}] = h.blocks.count({r, 0}) ? h.blocks[{r, 0}] + T : T;
    if (r > 0) h.blocks[{-r, 0}] = T.adjoint();
  }
  h.truncation_tail = tail;

  ComplexMatrix up = ComplexMatrix::Zero(2, 2), dn = ComplexMatrix::Zero(2, 2);
  up(1, 0) = m.epsilon;
  dn(0, 1) = m.epsilon;
  if (m.nu == 0) {
    h.blocks[{0, 0}] += up + dn;
  } else {
    h.blocks[{0, m.nu}] = h.blocks.count({0, m.nu}) ? h.blocks[{0, m.nu}] + up : up;
    h.blocks[{0, -m.nu}] = h.blocks.count({0, -m.nu}) ? h.blocks[{0, -m.nu}] + dn : dn;
  }
  return h;
}

RealHoppings real_hoppings(const BulkModel& m, int r1_max) {
  if (std::holds_alternative<MatrixModel>(m)) return real_hoppings(std::get<MatrixModel>(m));
  if (std::holds_alternative<AppendixModel>(m))
    return real_hoppings(std::get<AppendixModel>(m), r1_max);
  throw ConfigError("real_hoppings: continuous models are not supported on finite boxes");
}

MatrixModel to_matrix_model(const AppendixModel& m, int r1_max) {
  const RealHoppings h = real_hoppings(m, r1_max);
  MatrixModel out;
  out.dim = h.dim;
  out.hoppings = h.blocks;
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

Complex complex_from_json(const json& v) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2) return Complex(v[0].get<double>(), v[1].get<double>());
  throw ConfigError("expected number or [re, im] pair");
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

}  // namespace

BulkModel model_from_json_text(const std::string& text) {
  json doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  const std::string kind = doc.at("kind").get<std::string>();

  if (kind == "appendix") {
    AppendixModel m;
    m.epsilon = doc.at("epsilon").get<double>();
    m.nu = doc.at("nu").get<int>();
    if (doc.contains("window_order")) m.window_order = doc["window_order"].get<int>();
    m.validate();
    return m;
  }
  if (kind == "matrix") {
    MatrixModel m;
    m.dim = doc.at("dim").get<int>();
    for (const auto& h : doc.at("hoppings")) {
      const auto r = h.at("r");
      ComplexMatrix T(m.dim, m.dim);
      const auto& rows = h.at("matrix");
      if ((int)rows.size() != m.dim) throw ConfigError("hopping matrix has wrong row count");
      for (int i = 0; i < m.dim; ++i) {
        if ((int)rows[i].size() != m.dim) throw ConfigError("hopping matrix has wrong column count");
        for (int j = 0; j < m.dim; ++j) T(i, j) = complex_from_json(rows[i][j]);
      }
      m.hoppings[{r[0].get<int>(), r[1].get<int>()}] = T;
    }
    m.validate();
    return m;
  }

  ContinuousModel m;
  m.kind = continuous_kind_from_string(kind);
  for (const auto& c : doc.at("coeffs")) {
    const std::string fn = c.contains("fn") ? c["fn"].get<std::string>() : std::string("V");
    const auto k = c.at("k");
    m.fns[fn].set(k[0].get<int>(), k[1].get<int>(), complex_from_json(c.at("value")));
  }
  m.validate();
  return m;
}

BulkModel model_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

std::string model_to_json_text(const BulkModel& m) {
  json doc;
  if (const auto* a = std::get_if<AppendixModel>(&m)) {
    doc["kind"] = "appendix";
    doc["epsilon"] = a->epsilon;
    doc["nu"] = a->nu;
    doc["window_order"] = a->window_order;
  } else if (const auto* mm = std::get_if<MatrixModel>(&m)) {
    doc["kind"] = "matrix";
    doc["dim"] = mm->dim;
    json hops = json::array();
    for (const auto& [r, T] : mm->hoppings) {
      json rows = json::array();
      for (int i = 0; i < mm->dim; ++i) {
        json row = json::array();
        for (int j = 0; j < mm->dim; ++j) row.push_back(complex_to_json(T(i, j)));
        rows.push_back(row);
      }
      hops.push_back({{"r", {r.first, r.second}}, {"matrix", rows}});
    }
    doc["hoppings"] = hops;
  } else {
    const auto& cm = std::get<ContinuousModel>(m);
    doc["kind"] = to_string(cm.kind);
    json coeffs = json::array();
    for (const auto& [name, f] : cm.fns)
      for (const auto& [k, v] : f.coeffs)
        coeffs.push_back({{"fn", name}, {"k", {k.first, k.second}}, {"value", complex_to_json(v)}});
    doc["coeffs"] = coeffs;
  }
  return doc.dump(2);
}

int model_dim(const BulkModel& m) {
  if (const auto* mm = std::get_if<MatrixModel>(&m)) return mm->dim;
  if (std::holds_alternative<AppendixModel>(m)) return 2;
  return 1;
}

}  // namespace bect
