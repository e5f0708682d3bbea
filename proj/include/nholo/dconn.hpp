#pragma once

#include <functional>
#include <vector>

#include "nholo/dmetric.hpp"
#include "nholo/jet.hpp"
#include "nholo/nconn.hpp"

namespace nholo {

/// Connection coefficients at one point as order-1 jets, split into the four
/// blocks of a d-connection. Direction index is always last:
/// D_{e_k} e_j = L^i_jk e_i, D_{e_c} e_b = C^a_bc e_a, and so on.
struct ConnBlocks {
  int n = 0, m = 0;

  std::vector<Jet> lh;  // L^i_jk, n*n*n
  std::vector<Jet> lv;  // L^a_bk, m*m*n
  std::vector<Jet> ch;  // C^i_jc, n*n*m
  std::vector<Jet> cv;  // C^a_bc, m*m*m

  ConnBlocks() = default;
  ConnBlocks(int n_, int m_, int dim);

  Jet& Lh(int i, int j, int k) { return lh[(i * n + j) * n + k]; }
  Jet& Lv(int a, int b, int k) { return lv[(a * m + b) * n + k]; }
  Jet& Ch(int i, int j, int c) { return ch[(i * n + j) * m + c]; }
  Jet& Cv(int a, int b, int c) { return cv[(a * m + b) * m + c]; }
  const Jet& Lh(int i, int j, int k) const { return lh[(i * n + j) * n + k]; }
  const Jet& Lv(int a, int b, int k) const { return lv[(a * m + b) * n + k]; }
  const Jet& Ch(int i, int j, int c) const { return ch[(i * n + j) * m + c]; }
  const Jet& Cv(int a, int b, int c) const { return cv[(a * m + b) * m + c]; }

  /// Full coefficient Gamma^g_{a b} over flat adapted indices (h block
  /// first), direction b last; zero for the block patterns a d-connection
  /// does not carry.
  Jet gamma(int g, int a, int b) const;
};

/// A d-connection as a point-evaluable family of coefficient jets.
class DConnection {
 public:
  DConnection() = default;
  DConnection(Chart chart, std::function<ConnBlocks(const Point&)> eval);

  const Chart& chart() const { return chart_; }
  ConnBlocks eval(const Point& p) const { return eval_(p); }

 private:
  Chart chart_;
  std::function<ConnBlocks(const Point&)> eval_;
};

/// Index descriptor for DTensor: horizontal or vertical, upper or lower.
struct IndexDesc {
  bool horizontal;
  bool upper;
};

/// Numeric tensor at a point with typed adapted-frame indices.
class DTensor {
 public:
  DTensor(std::vector<IndexDesc> desc, int n, int m);

  const std::vector<IndexDesc>& desc() const { return desc_; }
  int extent(int slot) const { return ext_[slot]; }
  double& at(const std::vector<int>& idx);
  double at(const std::vector<int>& idx) const;

 private:
  int offset(const std::vector<int>& idx) const;
  std::vector<IndexDesc> desc_;
  std::vector<int> ext_;
  std::vector<double> a_;
};

/// Coordinate-frame metric at p: top-left g_ij + N_i^a N_j^b h_ab, off-blocks
/// N_i^b h_ba, bottom-right h_ab.
Matrix assemble_coordinate_metric(const DMetric& dm, const Point& p);

/// Inverse of assemble: recovers (g, h, N) values from a coordinate matrix.
/// N has m rows and n columns. Throws on a singular bottom-right block.
void extract_blocks(const Matrix& full, int n, int m, Matrix* g, Matrix* h,
                    Matrix* ncoef);

/// The metric-compatible d-connection with vanishing pure-h and pure-v
/// torsion, built from (g, h, N) via order-1 jet pipelines.
DConnection canonical_dconnection(const DMetric& dm);

/// Additive deformation blocks, each field indexed like the matching
/// connection block with direction last.
struct DeformBlocks {
  std::vector<ScalarField> lh, lv, ch, cv;  // same layouts as ConnBlocks
};

DConnection deform(const DConnection& base, const Chart& chart,
                   DeformBlocks pb);

/// Torsion components T^alpha_{beta gamma} of a d-connection, irreducible
/// blocks. vhh equals the N-curvature: T^a_ji = Omega^a_ji.
struct DTorsion {
  int n = 0, m = 0;
  std::vector<double> hhh;  // T^i_jk
  std::vector<double> hhv;  // T^i_ja
  std::vector<double> vhh;  // T^a_ji
  std::vector<double> vvh;  // T^a_bi
  std::vector<double> vvv;  // T^a_bc

  double Thhh(int i, int j, int k) const { return hhh[(i * n + j) * n + k]; }
  double Thhv(int i, int j, int a) const { return hhv[(i * n + j) * m + a]; }
  double Tvhh(int a, int j, int i) const { return vhh[(a * n + j) * n + i]; }
  double Tvvh(int a, int b, int i) const { return vvh[(a * m + b) * n + i]; }
  double Tvvv(int a, int b, int c) const { return vvv[(a * m + b) * m + c]; }
};

DTorsion d_torsion(const DConnection& dc, const NConnection& ncon,
                   const Point& p);

/// Torsion 2-form oracle: T^alpha(e_gamma, e_beta) = Gamma^alpha_{beta gamma}
/// - Gamma^alpha_{gamma beta} - W^alpha_{gamma beta} over flat indices.
double torsion_form_oracle(const DConnection& dc, const NConnection& ncon,
                           int alpha, int beta, int gamma, const Point& p);

/// Curvature components, six irreducible blocks, index order as listed.
struct DCurvature {
  int n = 0, m = 0;
  std::vector<double> b1;  // R^i_hjk
  std::vector<double> b2;  // R^a_bjk
  std::vector<double> b3;  // R^i_jka
  std::vector<double> b4;  // R^c_bka
  std::vector<double> b5;  // R^i_jbc
  std::vector<double> b6;  // R^a_bcd

  double R1(int i, int h, int j, int k) const {
    return b1[((i * n + h) * n + j) * n + k];
  }
  double R2(int a, int b, int j, int k) const {
    return b2[((a * m + b) * n + j) * n + k];
  }
  double R3(int i, int j, int k, int a) const {
    return b3[((i * n + j) * n + k) * m + a];
  }
  double R4(int c, int b, int k, int a) const {
    return b4[((c * m + b) * n + k) * m + a];
  }
  double R5(int i, int j, int b, int c) const {
    return b5[((i * n + j) * m + b) * m + c];
  }
  double R6(int a, int b, int c, int d) const {
    return b6[((a * m + b) * m + c) * m + d];
  }
};

DCurvature d_curvature(const DConnection& dc, const NConnection& ncon,
                       const Point& p);

/// (R(e_alpha, e_beta) z)^flat by nested covariant differentiation of a
/// constant-component d-vector plus the bracket term; the independent oracle
/// for the component formulas.
std::vector<double> curvature_commutator_oracle(const DConnection& dc,
                                                const NConnection& ncon,
                                                int alpha, int beta,
                                                const std::vector<double>& z,
                                                const Point& p);

/// Ricci blocks, scalar curvature and Einstein d-tensor at p.
struct RicciResult {
  Matrix ric_hh;   // R_ij
  Matrix ric_hv;   // R_ia
  Matrix ric_vh;   // R_ai
  Matrix ric_vv;   // R_ab
  double scalar = 0.0;
  Matrix einstein;  // G_{alpha beta} over flat adapted indices

  double max_ricci() const;
};

RicciResult ricci_scalar_einstein(const DConnection& dc, const DMetric& dm,
                                  const Point& p);

/// Levi-Civita connection of the assembled coordinate metric, transformed to
/// the N-adapted frame, plus the deformation tensor making up the canonical
/// d-connection. On the four d-blocks the only nonzero deformation entry is
/// P^i_jc = -(1/2) g^{ik} Omega^a_kj h_ca in the mixed horizontal block; the
/// other canonical blocks agree with the transformed coefficients as they
/// stand. residual is the max deviation canonical - (adapted LC + P) over
/// the four d-blocks. Arrays are dim^3 with direction last.
struct LCDeformation {
  int dim = 0;
  std::vector<double> nabla;
  std::vector<double> phat;
  double residual = 0.0;

  double nab(int g, int a, int b) const { return nabla[(g * dim + a) * dim + b]; }
  double P(int g, int a, int b) const { return phat[(g * dim + a) * dim + b]; }
};

LCDeformation levi_civita_and_deformation(const DMetric& dm, const Point& p);

/// Ricci tensor of the Levi-Civita connection of the assembled coordinate
/// metric, in the coordinate frame. Diagnostic for comparing the canonical
/// d-connection vacuum condition with the Levi-Civita one.
Matrix levi_civita_ricci(const DMetric& dm, const Point& p);

/// Symmetric part S of the connection, the theta-lowered reconstruction of
/// the full coefficients from (S, theta), and the round-trip residual.
/// Requires an m = n chart; theta is built from the g-block as
/// theta(e_i, ve_j) = g_ij. Arrays are dim^3, layout [x][arg][dir] for the
/// lowered objects.
struct SymmetrizeResult {
  int dim = 0;
  std::vector<double> sym;       // S^g_{ab}, direction last
  std::vector<double> lowered;   // theta-lowered Gamma, target
  std::vector<double> rebuilt;   // reconstruction from (S, theta)
  double residual = 0.0;         // max |lowered - rebuilt|
  double a2_residual = 0.0;      // cyclic e-derivative residual of theta
};

SymmetrizeResult symmetrize_reconstruct(const DConnection& dc,
                                        const DMetric& dm, const Point& p);

/// Compatibility residuals: max |(Dg)|, max |(D theta)| and the cyclic
/// adapted-derivative residual of theta. theta requires m = n; for m != n
/// the theta entries are reported as NaN-free zeros and only Dg is
/// meaningful.
struct CompatResiduals {
  double dg = 0.0;
  double dtheta = 0.0;
  double a2 = 0.0;
};

CompatResiduals compat_residuals(const DConnection& dc, const DMetric& dm,
                                 const Point& p);

/// Residual of the curvature split R(base + P) = R(base) + (DP + P ^ P)
/// expanded in components over flat indices.
double curvature_deformation_check(const DConnection& base,
                                   const NConnection& ncon,
                                   const DeformBlocks& pb, const Point& p);

}  // namespace nholo
