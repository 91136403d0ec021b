#pragma once

// Computable shadows of the K-theory of number rings and finite fields:
// orders, w_n invariants, gamma_l and induced Galois modules.

#include <optional>
#include <string>
#include <vector>

#include "stickel/groupring.hpp"
#include "stickel/stickelberger.hpp"

namespace stickel {

struct FiniteFieldKGroup {
  std::uint64_t q = 0;
  unsigned n = 0;
  Int order;               // q^n - 1
  std::uint64_t l = 0;
  int l_part_exponent = 0;  // v_l(q^n - 1)

  Json to_json() const;
};

/// |K_{2n-1}(F_q)| = q^n - 1.
Int k_order(std::uint64_t q, unsigned n);
FiniteFieldKGroup k_group(std::uint64_t q, unsigned n, std::uint64_t l);

/// w_n(Q(mu_m))_l; m = 1 is Q.
Int w_n_global(std::uint64_t m, long n, std::uint64_t l);
/// w_n(Q_l)_l.
Int w_n_local(long n, std::uint64_t l);

struct DivOrder {
  Int order;                // l^{v_l(w_{n+1}(Q) zeta(-n))}
  bool hypothesis_ok = true;  // w_n(Q_l)_l = 1
  Rat zeta_value;           // zeta(-n)
  Int w;                    // w_{n+1}(Q)_l
};
/// Order of the l-part of D(n) for K = Q.
DivOrder div_order(unsigned n, std::uint64_t l);

/// prod_{v | l} w_n(Q_v)_l / w_n(Q)_l, which is 1.
Rat index_formula(long n, std::uint64_t l);

struct GammaL {
  GroupRingElement factor;   // prod (1 - l^n sigma_l^{-1}) mod l^k
  GroupRingElement gamma;    // its inverse
  bool certified = false;    // factor * gamma = 1
  bool empty = false;        // l divides f
};
/// gamma_l for F with group g, relative to the modulus f.
GammaL gamma_l(unsigned n, std::uint64_t f, std::uint64_t l, const GroupPtr& g, int k);

struct RestrictionResult {
  bool holds = false;
  GroupRingElement restricted;  // Res_{E/F} Theta_n^E(b, f*)
  GroupRingElement predicted;   // Theta_n(b, f) (1 - l^n sigma_l^{-1})
  std::optional<bool> holds_mod;  // the gamma_l form modulo l^k, when integral
  std::uint64_t modulus_e = 0;
  std::uint64_t fstar = 0;
};
/// F = Q(mu_f), E = F(mu_{l^k}).
RestrictionResult restriction_gamma_check(unsigned n, std::uint64_t b, std::uint64_t f, std::uint64_t l, int k);

/// The induced module (+)_{w | v} K_{2n-1}(k_w)_l = Z/l^k[G] (x)_{G_v} fiber,
/// written additively: coordinate j is the fiber over the coset c_j G_v.
class InducedModule {
 public:
  using Element = std::vector<Int>;

  InducedModule(GroupPtr g, std::uint64_t p, unsigned n, std::uint64_t l);

  const GroupPtr& group() const { return g_; }
  std::uint64_t p() const { return p_; }
  unsigned n() const { return n_; }
  std::uint64_t l() const { return l_; }
  int k() const { return k_; }
  const Int& fiber_order() const { return mod_; }
  std::size_t residue_degree() const { return f_; }
  std::size_t cosets() const { return cosets_.size(); }
  const std::vector<std::size_t>& decomposition() const { return gv_; }
  const std::vector<std::size_t>& inertia() const { return iv_; }

  /// The distinguished generator xi_v.
  Element generator() const;
  Element zero() const;
  Element add(const Element& a, const Element& b) const;
  /// sigma * a for the group element with index s.
  Element act(std::size_t s, const Element& a) const;
  /// x * a (written a^x multiplicatively); x integral at l.
  Element act(const GroupRingElement& x, const Element& a) const;

  Json to_json(const Element& a) const;

 private:
  GroupPtr g_;
  std::uint64_t p_;
  unsigned n_;
  std::uint64_t l_;
  int k_ = 0;
  Int mod_;
  std::size_t f_ = 1;
  std::vector<std::size_t> gv_, iv_;
  std::vector<std::size_t> cosets_;     // representative index per coset
  std::vector<std::size_t> coset_of_;   // group index -> coset
  std::vector<long> frob_power_;        // group index -> alpha if in G_v, else -1
  std::vector<Int> qpow_;               // p^{n alpha} mod l^k
};

/// xi^{l^{vln} Theta}.
InducedModule::Element boundary_exponent(const InducedModule& mod, const InducedModule::Element& xi,
                                         const GroupRingElement& theta, int vln);

/// sigma_v^alpha(xi) = xi^{q^{n alpha}} for 0 <= alpha <= max_alpha (default:
/// one full Frobenius orbit).
bool frobenius_action_check(const InducedModule& mod, std::optional<long> max_alpha = std::nullopt);

}  // namespace stickel
