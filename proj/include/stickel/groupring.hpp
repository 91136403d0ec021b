#pragma once

// Galois groups of subfields of Q(mu_m) and their group rings.

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stickel/arith.hpp"

namespace stickel {

using Json = nlohmann::ordered_json;

class AbelianGaloisGroup;
using GroupPtr = std::shared_ptr<const AbelianGaloisGroup>;

/// G(F/Q) for F the fixed field of H inside Q(mu_m), as (Z/m)^x / H.
/// Elements are indexed 0..order()-1 in increasing order of their canonical
/// representative (least positive residue in the coset); index 0 is the identity.
class AbelianGaloisGroup {
 public:
  /// `subgroup` lists generators of H (units mod m); empty means H = {1}.
  /// m = 1 (or 2) gives Q itself.
  static GroupPtr make(std::uint64_t m, const std::vector<std::uint64_t>& subgroup = {});
  static GroupPtr rationals() { return make(1); }

  std::uint64_t modulus() const { return m_; }
  /// Smallest d | m with ker((Z/m)^x -> (Z/d)^x) inside H.
  std::uint64_t conductor() const { return cond_; }
  /// All elements of H, sorted.
  const std::vector<std::uint64_t>& subgroup() const { return h_; }
  std::size_t order() const { return reps_.size(); }
  std::uint64_t rep(std::size_t idx) const { return reps_.at(idx); }
  const std::vector<std::uint64_t>& reps() const { return reps_; }

  /// Index of the Frobenius sigma_a; a must be coprime to the conductor.
  std::size_t index_of(const Int& a) const;
  std::size_t index_of(std::uint64_t a) const;
  std::optional<std::size_t> try_index_of(std::uint64_t a) const;

  std::size_t mul(std::size_t i, std::size_t j) const;
  std::size_t inv(std::size_t i) const;
  std::size_t identity() const { return 0; }
  /// Index of complex conjugation j = sigma_{-1}.
  std::size_t conjugation() const { return conj_; }
  bool is_cm() const { return conj_ != 0; }

  /// Frobenius at p modulo inertia: the class of x with x = p mod m' and
  /// x = 1 mod p^a, where m = p^a m'.
  std::size_t frobenius(std::uint64_t p) const;
  /// Inertia subgroup at p (indices, sorted).
  std::vector<std::size_t> inertia(std::uint64_t p) const;
  /// Decomposition subgroup at p: inertia together with the Frobenius.
  std::vector<std::size_t> decomposition(std::uint64_t p) const;

  bool operator==(const AbelianGaloisGroup& o) const { return m_ == o.m_ && h_ == o.h_; }
  std::string describe() const;

 private:
  AbelianGaloisGroup() = default;

  std::uint64_t m_ = 1;
  std::uint64_t cond_ = 1;
  std::vector<std::uint64_t> h_;
  std::vector<std::uint64_t> reps_;
  std::vector<long> coset_of_;       // residue mod m -> index, -1 for non-units
  std::vector<long> cond_index_;     // residue mod conductor -> index
  std::size_t conj_ = 0;
};

bool same_group(const GroupPtr& a, const GroupPtr& b);

/// Coefficient ring: Q, or Z/l^k.
struct CoeffDomain {
  std::uint64_t l = 0;
  int k = 0;

  static CoeffDomain rational() { return {}; }
  static CoeffDomain modular(std::uint64_t l, int k);
  bool is_rational() const { return l == 0; }
  Int modulus() const;
  /// "rat" or "mod l^k".
  std::string name() const;
  static CoeffDomain parse(const std::string& s);
  bool operator==(const CoeffDomain& o) const { return l == o.l && k == o.k; }
};

class GroupRingElement {
 public:
  GroupRingElement(GroupPtr g, CoeffDomain d = CoeffDomain::rational());

  static GroupRingElement sigma(GroupPtr g, std::uint64_t a, CoeffDomain d = CoeffDomain::rational());
  static GroupRingElement basis(GroupPtr g, std::size_t idx, CoeffDomain d = CoeffDomain::rational());
  static GroupRingElement identity(GroupPtr g, CoeffDomain d = CoeffDomain::rational());
  /// Scalar c times the identity.
  static GroupRingElement scalar(GroupPtr g, const Rat& c, CoeffDomain d = CoeffDomain::rational());

  const GroupPtr& group() const { return g_; }
  const CoeffDomain& domain() const { return d_; }
  std::size_t size() const { return g_->order(); }

  /// Coefficient at the element with index idx (rational domain).
  const Rat& rat(std::size_t idx) const;
  /// Coefficient at idx (modular domain), in [0, l^k).
  const Int& residue(std::size_t idx) const;
  PadicResidue padic(std::size_t idx) const;
  void set(std::size_t idx, const Rat& c);
  void set_residue(std::size_t idx, const Int& c);
  /// Adds c to the coefficient at idx; works in either domain (c must be
  /// l-integral for modular elements).
  void add(std::size_t idx, const Rat& c);
  bool coeff_is_zero(std::size_t idx) const;

  GroupRingElement operator+(const GroupRingElement& o) const;
  GroupRingElement operator-(const GroupRingElement& o) const;
  GroupRingElement operator-() const;
  GroupRingElement operator*(const GroupRingElement& o) const;
  GroupRingElement scaled(const Rat& c) const;
  bool operator==(const GroupRingElement& o) const;
  bool operator!=(const GroupRingElement& o) const { return !(*this == o); }
  bool is_zero() const;

  /// Multiplication by the group element with index idx.
  GroupRingElement shifted(std::size_t idx) const;
  /// sigma -> sigma^{-1} extended linearly.
  GroupRingElement involution() const;
  /// Rational element reduced into Z/l^k; throws InvalidInput if some
  /// coefficient is not l-integral.
  GroupRingElement reduce(std::uint64_t l, int k) const;
  /// Index of a coefficient that is not l-integral, if any.
  std::optional<std::size_t> non_integral_at(std::uint64_t l) const;
  bool has_integer_coeffs() const;
  /// Inverse in (Z/l^k)[G]; throws InvalidInput when not a unit.
  GroupRingElement inverse() const;

  Json to_json() const;
  static GroupRingElement from_json(const Json& j);
  /// Compact "c1*s1 + c2*s2" rendering.
  std::string to_string() const;

 private:
  void check_same(const GroupRingElement& o) const;

  GroupPtr g_;
  CoeffDomain d_;
  std::vector<Rat> q_;
  std::vector<Int> z_;
};

/// Galois restriction along F subset E. The target modulus must divide the
/// source modulus and contain the image of the source subgroup.
GroupRingElement restrict(const GroupRingElement& x, const GroupPtr& target);

/// w_n(F)_l for F given by the group: the largest l-power w such that
/// u^n = 1 mod w for every u in the image of G_F under the l-adic
/// cyclotomic character. n != 0.
Int w_n_part(const AbelianGaloisGroup& g, long n, std::uint64_t l);
/// Number of roots of unity in F.
Int roots_of_unity_order(const AbelianGaloisGroup& g);

/// Values of the n-th power of the cyclotomic character of G modulo w,
/// indexed by group index. Throws InvalidInput if the character does not
/// factor through G, i.e. some coset has lifts with different values.
std::vector<Int> cyclotomic_character_table(const AbelianGaloisGroup& g, long n, const Int& w);

/// The automorphism t_n of (Z/l^k)[G]: sigma -> omega^(n)(sigma)^{-1} sigma.
GroupRingElement twist_tn(const GroupRingElement& x, long n, std::uint64_t l);

/// Teichmuller values omega^i(sigma) mod l^k per group index; throws if
/// omega^i does not factor through G.
std::vector<Int> omega_power_table(const AbelianGaloisGroup& g, long i, std::uint64_t l, int k);

/// sum_sigma x(sigma) omega^i(sigma) mod l^k.
PadicResidue omega_char_value(const GroupRingElement& x, long i, std::uint64_t l, int k);

/// e_{omega^i} = |G|^{-1} sum_g omega^i(g) g^{-1} in (Z/l^k)[G].
GroupRingElement idempotent(long i, std::uint64_t l, int k, const GroupPtr& g);

struct AnnihilatorCandidate {
  Int norm;            // Np
  std::uint64_t sigma;  // representative of sigma_p
};

struct AnnihilatorDecomposition {
  std::vector<GroupRingElement> x;  // one per candidate, integer coefficients
  Int l1_norm;
};

/// Writes (1 - Nb sigma_b^{-1}) = sum_i x_i (1 - Np_i sigma_{p_i}^{-1}) in Z[G].
/// Returns nullopt when the candidates do not generate the target.
std::optional<AnnihilatorDecomposition> annihilator_decomposition(
    const GroupPtr& g, const Int& b_norm, std::uint64_t sigma_b,
    const std::vector<AnnihilatorCandidate>& candidates, const Int& w_f);

/// (1 - N sigma^{-1}) for the given norm and representative.
GroupRingElement euler_factor(const GroupPtr& g, const Int& norm, std::uint64_t sigma,
                              CoeffDomain d = CoeffDomain::rational());

}  // namespace stickel
