#include "brodylab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace brodylab {

namespace {

int node_dim(const CurveRep::Node& node) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return n.point.dim();
        } else if constexpr (std::is_same_v<T, RationalNode>) {
          return static_cast<int>(n.components.size()) - 1;
        } else if constexpr (std::is_same_v<T, LatticeSumNode>) {
          return 1;
        } else if constexpr (std::is_same_v<T, GluedNode>) {
          return n.inner.dim();
        } else {
          return n.inner.dim();
        }
      },
      node);
}

// Joint rescale of (F, F') for conditioning; the jet's common scale is a
// gauge choice that |df| and the projective value do not see.
void normalize_jet(Jet& j) {
  double m = 0.0;
  for (const cplx& c : j.F) m = std::max(m, std::abs(c));
  if (m == 0.0 || m == 1.0) return;
  const double inv = 1.0 / m;
  for (cplx& c : j.F) c *= inv;
  for (cplx& c : j.Fp) c *= inv;
}

Jet rational_jet(const RationalNode& node, cplx z) {
  Jet j;
  j.F.reserve(node.components.size());
  j.Fp.reserve(node.components.size());
  for (const auto& poly : node.components) {
    cplx v = 0.0, dv = 0.0;  // Horner for p and p'
    for (std::size_t k = poly.size(); k-- > 0;) {
      dv = dv * z + v;
      v = v * z + poly[k];
    }
    j.F.push_back(v);
    j.Fp.push_back(dv);
  }
  return j;
}

Jet lattice_jet(const LatticeSumNode& node, cplx z) {
  const cplx zp = z + node.offset_w;
  const double L = node.L;

  if (node.window_radius == 0.0) {
    // Infinite periodic extension: every lattice site carries the common
    // coefficient u. Each row of the lattice sums in closed form,
    //   sum_m 1/(w - m)^3 = pi^3 cos(pi w) / sin^3(pi w),
    // and successive rows decay like e^{-2 pi |Im w|}, so ten rows on each
    // side of the nearest one reach machine precision. Reducing Re w mod 1
    // before the trig calls (the row sum has period 1 and even parity in
    // the half-period sign) makes the evaluation periodic to rounding
    // error instead of to sine argument-reduction error.
    const cplx u = node.coeffs.front().u;
    const cplx w0 = zp / L;
    const int n0 = static_cast<int>(std::lround(w0.imag()));
    cplx T = 0.0, Tp = 0.0;
    for (int n = n0 - 10; n <= n0 + 10; ++n) {
      const double re = w0.real() - std::lround(w0.real());
      const cplx wn(re, w0.imag() - n);
      const cplx s = std::sin(kPi * wn);
      const cplx c = std::cos(kPi * wn);
      const cplx s2 = s * s;
      T += c / (s2 * s);
      Tp += (2.0 * c * c + 1.0) / (s2 * s2);
    }
    const double pi3 = kPi * kPi * kPi;
    const cplx S = pi3 * T / (L * L * L);
    const cplx Sp = -kPi * pi3 * Tp / (L * L * L * L);

    const int m0 = static_cast<int>(std::lround(w0.real()));
    const cplx d = zp - cplx(m0 * L, n0 * L);
    const double ad = std::abs(d);
    Jet j;
    if (ad * ad * ad < std::abs(u)) {
      // Same pole chart as the windowed branch. The regular remainder is
      // recovered by subtracting the singular term; the cancellation error
      // in R enters the jet only through d^3 R, which keeps it at rounding
      // level uniformly in d.
      const cplx d2 = d * d;
      const cplx d3 = d2 * d;
      cplx R = 0.0, Rp = 0.0;
      if (ad > 1e-14 * L) {
        R = u * (S - 1.0 / d3);
        Rp = u * (Sp + 3.0 / (d3 * d));
      }
      j.F = {d3, u + d3 * R};
      j.Fp = {3.0 * d2, 3.0 * d2 * R + d3 * Rp};
    } else {
      j.F = {cplx(1.0, 0.0), u * S};
      j.Fp = {cplx(0.0, 0.0), u * Sp};
    }
    return j;
  }

  // Locate the nearest lattice pole carried by the window, if any.
  const int m0 = static_cast<int>(std::lround(zp.real() / L));
  const int n0 = static_cast<int>(std::lround(zp.imag() / L));
  const LatticeSumNode::Coeff* nearest = nullptr;
  for (const auto& c : node.coeffs) {
    if (c.m == m0 && c.n == n0) {
      nearest = &c;
      break;
    }
  }

  if (nearest != nullptr) {
    const cplx d = zp - cplx(nearest->m * L, nearest->n * L);
    const double ad = std::abs(d);
    if (ad * ad * ad < std::abs(nearest->u)) {
      // Pole chart: multiply through by d^3 so the triple pole becomes a
      // zero of the first homogeneous coordinate. The regular remainder R
      // is accumulated independently, avoiding cancellation against u*/d^3.
      cplx R = 0.0, Rp = 0.0;
      for (const auto& c : node.coeffs) {
        if (&c == nearest) continue;
        const cplx w = zp - cplx(c.m * L, c.n * L);
        const cplx w3 = w * w * w;
        R += c.u / w3;
        Rp += -3.0 * c.u / (w3 * w);
      }
      const cplx d2 = d * d;
      const cplx d3 = d2 * d;
      Jet j;
      j.F = {d3, nearest->u + d3 * R};
      j.Fp = {3.0 * d2, 3.0 * d2 * R + d3 * Rp};
      return j;
    }
  }

  cplx S = 0.0, Sp = 0.0;
  for (const auto& c : node.coeffs) {
    const cplx w = zp - cplx(c.m * L, c.n * L);
    const cplx w3 = w * w * w;
    S += c.u / w3;
    Sp += -3.0 * c.u / (w3 * w);
  }
  Jet j;
  j.F = {cplx(1.0, 0.0), S};
  j.Fp = {cplx(0.0, 0.0), Sp};
  return j;
}

Jet glued_jet(const GluedNode& node, cplx z) {
  const Jet inner = jet(node.inner, z);
  const std::size_t n = inner.F.size();
  std::vector<cplx> G(n, 0.0), Gp(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      G[i] += node.rotation[i][k] * inner.F[k];
      Gp[i] += node.rotation[i][k] * inner.Fp[k];
    }
  const cplx w = z - node.p;
  const cplx w2 = w * w;
  const cplx w3 = w2 * w;
  const double a = node.amplitude;
  Jet j;
  j.F.resize(n);
  j.Fp.resize(n);
  j.F[0] = w3 * G[0];
  j.Fp[0] = 3.0 * w2 * G[0] + w3 * Gp[0];
  for (std::size_t i = 1; i < n; ++i) {
    j.F[i] = w3 * G[i] + a * G[0];
    j.Fp[i] = 3.0 * w2 * G[i] + w3 * Gp[i] + a * Gp[0];
  }
  return j;
}

}  // namespace

CurveRep::CurveRep(Node node)
    : node_(std::make_shared<const Node>(std::move(node))),
      dim_(node_dim(*node_)) {}

CurveRep make_constant(ProjectivePoint q) {
  return CurveRep(ConstantNode{std::move(q)});
}

CurveRep make_rational(std::vector<std::vector<cplx>> components) {
  if (components.size() < 2)
    throw InvalidParameter("rational curve needs at least 2 components");
  return CurveRep(RationalNode{std::move(components)});
}

CurveRep make_lattice_sum(LatticeSumNode node) {
  if (node.L <= 0.0) throw InvalidParameter("lattice cell side must be > 0");
  if (node.window_radius < 0.0)
    throw InvalidParameter("lattice window radius must be >= 0");
  if (node.window_radius == 0.0) {
    // window_radius = 0 selects the infinite periodic extension, which is
    // only defined for a single common coefficient.
    if (node.coeffs.empty())
      throw InvalidParameter("periodic lattice sum needs a coefficient");
    for (const auto& c : node.coeffs)
      if (c.u != node.coeffs.front().u)
        throw InvalidParameter(
            "periodic lattice sum requires equal coefficients");
  }
  return CurveRep(std::move(node));
}

Jet jet(const CurveRep& curve, cplx z) {
  Jet j = std::visit(
      [&](const auto& n) -> Jet {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          Jet out;
          out.F = n.point.coords();
          out.Fp.assign(out.F.size(), cplx(0.0, 0.0));
          return out;
        } else if constexpr (std::is_same_v<T, RationalNode>) {
          return rational_jet(n, z);
        } else if constexpr (std::is_same_v<T, LatticeSumNode>) {
          return lattice_jet(n, z);
        } else if constexpr (std::is_same_v<T, TranslatedNode>) {
          return jet(n.inner, z + n.a);
        } else if constexpr (std::is_same_v<T, RescaledNode>) {
          Jet out = jet(n.inner, n.lambda * z);
          for (cplx& c : out.Fp) c *= n.lambda;
          return out;
        } else {
          return glued_jet(n, z);
        }
      },
      curve.node());
  normalize_jet(j);
  return j;
}

ProjectivePoint evaluate(const CurveRep& curve, cplx z) {
  return ProjectivePoint(jet(curve, z).F);
}

double local_lipschitz(const CurveRep& curve, cplx z) {
  const Jet j = jet(curve, z);
  double f2 = 0.0, fp2 = 0.0;
  cplx inner = 0.0;
  for (std::size_t i = 0; i < j.F.size(); ++i) {
    f2 += std::norm(j.F[i]);
    fp2 += std::norm(j.Fp[i]);
    inner += std::conj(j.F[i]) * j.Fp[i];
  }
  if (f2 == 0.0) throw NumericError("jet hit the base locus");
  const double gram = std::max(0.0, f2 * fp2 - std::norm(inner));
  return std::sqrt(gram) / (std::sqrt(kPi) * f2);
}

CurveRep translate(const CurveRep& curve, cplx a) {
  return CurveRep(TranslatedNode{curve, a});
}

CurveRep rescale(const CurveRep& curve, double lambda) {
  if (!(lambda > 0.0))
    throw InvalidParameter("rescale: lambda must be positive");
  return CurveRep(RescaledNode{curve, lambda});
}

namespace {

// d_FS([1 : t e^{i*} : ... : t e^{i*}], [1:0:...:0]) for tail modulus t,
// N affine components.
double tail_fs_distance(int N, double t) {
  const double c = 1.0 / std::sqrt(1.0 + N * t * t);
  return std::acos(std::clamp(c, 0.0, 1.0)) / std::sqrt(kPi);
}

double tail_sup_norm(int N, double a, const GlueConfig& cfg) {
  // Sup over a log-spaced radial grid of the far field; the profile is
  // monotone in r, the grid keeps the solve honest about that.
  double sup = 0.0;
  const double r0 = cfg.far_field_radius;
  for (int k = 0; k <= 64; ++k) {
    const double r = r0 * std::pow(50.0, k / 64.0);
    const double t = a / (r * r * r);
    const double v = cfg.norm == GlueNorm::kFarFieldFs
                         ? tail_fs_distance(N, t)
                         : t * std::sqrt(static_cast<double>(N));
    sup = std::max(sup, v);
  }
  return sup;
}

}  // namespace

double glue_amplitude(int N, const GlueConfig& cfg) {
  double lo = 0.0, hi = 1.0;
  if (tail_sup_norm(N, hi, cfg) < cfg.target)
    throw NumericError("glue amplitude solve failed to bracket the target");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail_sup_norm(N, mid, cfg) < cfg.target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Unitary with first row <q,.> so that q maps to [1:0:...:0]; remaining
// rows complete it by Gram-Schmidt over the standard basis.
std::vector<std::vector<cplx>> make_rotation(const ProjectivePoint& q) {
  const std::size_t n = q.coords().size();
  std::vector<std::vector<cplx>> U;
  U.reserve(n);
  std::vector<cplx> first(n);
  for (std::size_t i = 0; i < n; ++i) first[i] = std::conj(q.coords()[i]);
  U.push_back(std::move(first));
  for (std::size_t e = 0; e < n && U.size() < n; ++e) {
    std::vector<cplx> v(n, 0.0);
    v[e] = 1.0;
    for (const auto& row : U) {
      cplx proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += std::conj(row[i]) * v[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= proj * row[i];
    }
    double norm = 0.0;
    for (const cplx& c : v) norm += std::norm(c);
    if (norm < 1e-20) continue;
    const double inv = 1.0 / std::sqrt(norm);
    for (cplx& c : v) c *= inv;
    U.push_back(std::move(v));
  }
  if (U.size() != n) throw NumericError("glue: rotation construction failed");
  return U;
}

}  // namespace

CurveRep glue(const CurveRep& curve, cplx p, const ProjectivePoint& q,
              const GlueConfig& cfg) {
  if (q.dim() != curve.dim()) throw InvalidPoint("glue: dimension mismatch");

  // The surgery only makes sense where f is nearly constant at q.
  for (int ring = 0; ring <= 4; ++ring)
    for (int k = 0; k < (ring == 0 ? 1 : 8); ++k) {
      const double r = cfg.probe_radius * ring / 4.0;
      const cplx z = p + std::polar(r, 2.0 * kPi * k / 8.0);
      if (fs_distance(evaluate(curve, z), q) > cfg.probe_delta)
        throw NotLocallyConstant(
            "glue: curve is not close to q on the probe disk");
    }

  const double a = glue_amplitude(curve.dim(), cfg);
  return CurveRep(GluedNode{curve, p, q, a, make_rotation(q)});
}

// --------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json cplx_to_json(cplx c) {
  return nlohmann::json::array({c.real(), c.imag()});
}

cplx cplx_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json point_to_json(const ProjectivePoint& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const cplx& c : p.coords()) arr.push_back(cplx_to_json(c));
  return arr;
}

ProjectivePoint point_from_json(const nlohmann::json& j) {
  std::vector<cplx> v;
  for (const auto& e : j) v.push_back(cplx_from_json(e));
  return ProjectivePoint(std::move(v));
}

}  // namespace

nlohmann::json curve_to_json(const CurveRep& curve) {
  nlohmann::json j;
  j["N"] = curve.dim();
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        nlohmann::json& payload = j["payload"];
        if constexpr (std::is_same_v<T, ConstantNode>) {
          j["kind"] = "constant";
          payload["point"] = point_to_json(n.point);
        } else if constexpr (std::is_same_v<T, RationalNode>) {
          j["kind"] = "rational";
          auto comps = nlohmann::json::array();
          for (const auto& poly : n.components) {
            auto pj = nlohmann::json::array();
            for (const cplx& c : poly) pj.push_back(cplx_to_json(c));
            comps.push_back(pj);
          }
          payload["components"] = comps;
        } else if constexpr (std::is_same_v<T, LatticeSumNode>) {
          j["kind"] = "lattice_sum";
          payload["L"] = n.L;
          payload["window_radius"] = n.window_radius;
          payload["offset"] = cplx_to_json(n.offset_w);
          nlohmann::json coeffs = nlohmann::json::object();
          for (const auto& c : n.coeffs) {
            std::ostringstream key;
            key << c.m << "," << c.n;
            coeffs[key.str()] = cplx_to_json(c.u);
          }
          payload["coefficients"] = coeffs;
        } else if constexpr (std::is_same_v<T, TranslatedNode>) {
          j["kind"] = "translated";
          payload["inner"] = curve_to_json(n.inner);
          payload["a"] = cplx_to_json(n.a);
        } else if constexpr (std::is_same_v<T, RescaledNode>) {
          j["kind"] = "rescaled";
          payload["inner"] = curve_to_json(n.inner);
          payload["lambda"] = n.lambda;
        } else {
          j["kind"] = "glued";
          payload["inner"] = curve_to_json(n.inner);
          payload["p"] = cplx_to_json(n.p);
          payload["q"] = point_to_json(n.q);
          payload["amplitude"] = n.amplitude;
        }
      },
      curve.node());
  return j;
}

CurveRep curve_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json& payload = j.at("payload");
  if (kind == "constant") {
    return make_constant(point_from_json(payload.at("point")));
  }
  if (kind == "rational") {
    std::vector<std::vector<cplx>> comps;
    for (const auto& pj : payload.at("components")) {
      std::vector<cplx> poly;
      for (const auto& cj : pj) poly.push_back(cplx_from_json(cj));
      comps.push_back(std::move(poly));
    }
    return make_rational(std::move(comps));
  }
  if (kind == "lattice_sum") {
    LatticeSumNode node;
    node.L = payload.at("L").get<double>();
    node.window_radius = payload.at("window_radius").get<double>();
    node.offset_w = cplx_from_json(payload.at("offset"));
    for (const auto& [key, val] : payload.at("coefficients").items()) {
      LatticeSumNode::Coeff c;
      std::istringstream is(key);
      char comma = 0;
      is >> c.m >> comma >> c.n;
      if (comma != ',') throw InvalidParameter("bad coefficient key: " + key);
      c.u = cplx_from_json(val);
      node.coeffs.push_back(c);
    }
    std::sort(node.coeffs.begin(), node.coeffs.end(),
              [](const auto& a, const auto& b) {
                return std::tie(a.m, a.n) < std::tie(b.m, b.n);
              });
    return make_lattice_sum(std::move(node));
  }
  if (kind == "translated") {
    return translate(curve_from_json(payload.at("inner")),
                     cplx_from_json(payload.at("a")));
  }
  if (kind == "rescaled") {
    return rescale(curve_from_json(payload.at("inner")),
                   payload.at("lambda").get<double>());
  }
  if (kind == "glued") {
    // Rebuilt directly from the stored amplitude; glue() would re-run the
    // calibration solve and the locality probe.
    CurveRep inner = curve_from_json(payload.at("inner"));
    ProjectivePoint q = point_from_json(payload.at("q"));
    auto rot = make_rotation(q);
    return CurveRep(GluedNode{std::move(inner),
                              cplx_from_json(payload.at("p")), std::move(q),
                              payload.at("amplitude").get<double>(),
                              std::move(rot)});
  }
  throw InvalidParameter("unknown curve kind: " + kind);
}

}  // namespace brodylab
