#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "brodylab/common.hpp"
#include "brodylab/projective.hpp"

#include <json.hpp>

namespace brodylab {

class CurveRep;

/// Homogeneous 1-jet (F, F') at a point; both vectors share an arbitrary
/// common scale. The spherical derivative and the projective value are
/// invariant under that scale and under F' -> F' + c F.
struct Jet {
  std::vector<cplx> F;
  std::vector<cplx> Fp;
};

struct ConstantNode {
  ProjectivePoint point;
};

/// [p_0(z) : ... : p_N(z)], coefficients in ascending degree order.
struct RationalNode {
  std::vector<std::vector<cplx>> components;
};

/// z -> [1 : sum_lambda u_lambda / (z + w - lambda)^3] into CP^1, where
/// lambda = mL + nLi ranges over the stored finite window. A window radius
/// of exactly 0 selects the infinite periodic extension instead: every
/// lattice site carries the (common) coefficient and the sum runs over all
/// of Lambda, which is what makes the curve exactly Lambda-periodic.
struct LatticeSumNode {
  double L = 1.0;
  double window_radius = 0.0;
  cplx offset_w{0.0, 0.0};
  struct Coeff {
    int m;
    int n;
    cplx u;
  };
  std::vector<Coeff> coeffs;
};

class CurveRep {
 public:
  struct Node;  // variant over the node structs, defined below

  explicit CurveRep(Node node);

  const Node& node() const { return *node_; }
  int dim() const { return dim_; }  // the N of the target CP^N

 private:
  std::shared_ptr<const Node> node_;
  int dim_;
};

struct TranslatedNode {
  CurveRep inner;
  cplx a;
};

struct RescaledNode {
  CurveRep inner;
  double lambda;
};

/// Psi(f)(z) = [1 : f_1 + a/(z-p)^3 : ... : f_N + a/(z-p)^3] in coordinates
/// rotated so q = [1:0:...:0]; `rotation` is the unitary doing the rotating.
struct GluedNode {
  CurveRep inner;
  cplx p;
  ProjectivePoint q;
  double amplitude;
  std::vector<std::vector<cplx>> rotation;
};

struct CurveRep::Node
    : std::variant<ConstantNode, RationalNode, LatticeSumNode, TranslatedNode,
                   RescaledNode, GluedNode> {
  using variant::variant;
};

CurveRep make_constant(ProjectivePoint q);
CurveRep make_rational(std::vector<std::vector<cplx>> components);
CurveRep make_lattice_sum(LatticeSumNode node);

Jet jet(const CurveRep& curve, cplx z);
ProjectivePoint evaluate(const CurveRep& curve, cplx z);

/// Spherical derivative |df|(z) in the unit-area normalization:
/// (1/sqrt(pi)) * sqrt(|F|^2|F'|^2 - |<F,F'>|^2) / |F|^2.
double local_lipschitz(const CurveRep& curve, cplx z);

CurveRep translate(const CurveRep& curve, cplx a);
CurveRep rescale(const CurveRep& curve, double lambda);

/// Which norm fixes the amplitude of the cubic-pole tail h_a. The target
/// value 1/10 is stated without a norm; the Fubini-Study reading over the
/// far field |z-p| >= far_field_radius is the default (the sup over all of
/// the plane is identically the diameter, so it cannot be the intent).
enum class GlueNorm { kFarFieldFs, kAffineModulus };

struct GlueConfig {
  GlueNorm norm = GlueNorm::kFarFieldFs;
  double target = 0.1;
  double far_field_radius = 1.0;
  // Precondition probe: f must stay within probe_delta of q on the disk of
  // radius probe_radius around p.
  double probe_delta = 0.2;
  double probe_radius = 1.0;
};

CurveRep glue(const CurveRep& curve, cplx p, const ProjectivePoint& q,
              const GlueConfig& cfg = {});

/// The calibrated tail amplitude alone (exposed for tests).
double glue_amplitude(int N, const GlueConfig& cfg = {});

nlohmann::json curve_to_json(const CurveRep& curve);
CurveRep curve_from_json(const nlohmann::json& j);

}  // namespace brodylab
