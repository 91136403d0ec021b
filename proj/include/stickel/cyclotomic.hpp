#pragma once

// Arithmetic in Z[zeta_m], Jacobi sums, finite divisors and the
// Brumer-Stark elements of abelian extensions of Q.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stickel/groupring.hpp"
#include "stickel/stickelberger.hpp"

namespace stickel {

/// Phi_m, the reduction table x^j mod Phi_m for 0 <= j < m, shared per m.
struct CycloContext {
  std::uint64_t m = 1;
  std::size_t phi = 1;
  IntPoly cyclotomic;                     // Phi_m, increasing degree
  std::vector<std::vector<long>> xpow;    // x^j mod Phi_m

  static std::shared_ptr<const CycloContext> get(std::uint64_t m);
};

/// An element of Z[zeta_m] in the power basis 1, x, ..., x^{phi(m)-1}.
class CycloInt {
 public:
  explicit CycloInt(std::uint64_t m);
  CycloInt(std::uint64_t m, std::vector<Int> coeffs);
  static CycloInt from_int(std::uint64_t m, const Int& c);
  /// zeta_m^e.
  static CycloInt zeta_power(std::uint64_t m, long e);
  /// sum_j c_j zeta^j for a vector of length m.
  static CycloInt from_exponents(std::uint64_t m, const std::vector<Int>& c);

  std::uint64_t modulus() const { return ctx_->m; }
  const std::vector<Int>& coeffs() const { return c_; }

  CycloInt operator+(const CycloInt& o) const;
  CycloInt operator-(const CycloInt& o) const;
  CycloInt operator-() const;
  CycloInt operator*(const CycloInt& o) const;
  CycloInt scaled(const Int& c) const;
  CycloInt pow(unsigned long e) const;
  bool operator==(const CycloInt& o) const { return ctx_->m == o.ctx_->m && c_ == o.c_; }
  bool operator!=(const CycloInt& o) const { return !(*this == o); }
  bool is_zero() const;
  std::optional<Int> as_integer() const;
  /// gcd of the coefficients (0 for the zero element).
  Int content() const;
  /// Exact division by a rational integer; throws if not divisible.
  CycloInt divided_by(const Int& d) const;

  /// sigma_c: zeta -> zeta^c.
  CycloInt galois(std::uint64_t c) const;
  Int norm() const;
  /// Value at x = r modulo mod.
  Int eval_mod(const Int& r, const Int& mod) const;

  Json to_json() const;
  static CycloInt from_json(const Json& j);
  std::string to_string() const;

 private:
  std::shared_ptr<const CycloContext> ctx_;
  std::vector<Int> c_;
};

/// num / den with den a positive rational integer.
class CycloFrac {
 public:
  CycloFrac(CycloInt num, Int den = 1);
  const CycloInt& num() const { return num_; }
  const Int& den() const { return den_; }
  std::uint64_t modulus() const { return num_.modulus(); }

  CycloFrac operator*(const CycloFrac& o) const;
  CycloFrac galois(std::uint64_t c) const;
  CycloFrac pow(unsigned long e) const;
  bool operator==(const CycloFrac& o) const;
  bool is_one() const;
  Rat norm() const;

  Json to_json() const;
  static CycloFrac from_json(const Json& j);

 private:
  void normalize();
  CycloInt num_;
  Int den_;
};

/// Discrete logarithms over F_p^x with respect to the least primitive root.
struct DlogTable {
  std::uint64_t p = 0;
  std::uint64_t g = 0;
  std::vector<std::uint32_t> dlog;  // dlog[x] for 1 <= x < p
  static std::shared_ptr<const DlogTable> get(std::uint64_t p);
};

/// chi(g^t) = zeta_m^{u t} on F_p^x, p = 1 mod m.
class ResidueCharacter {
 public:
  ResidueCharacter(std::uint64_t p, std::uint64_t m, std::uint64_t u = 1);

  std::uint64_t p() const { return table_->p; }
  std::uint64_t m() const { return m_; }
  std::uint64_t u() const { return u_; }
  std::uint64_t generator() const { return table_->g; }
  /// chi(x) = zeta^e; nullopt when p | x.
  std::optional<std::uint64_t> exponent(const Int& x) const;
  std::optional<std::uint64_t> exponent(std::uint64_t x) const;
  ResidueCharacter pow(long k) const;
  bool is_trivial() const { return u_ == 0; }
  std::uint64_t order() const;
  /// Root r of Phi_m mod p indexing the prime w of Q(mu_m) attached to chi
  /// (chi must have exact order m).
  std::uint64_t attached_root() const;

 private:
  std::shared_ptr<const DlogTable> table_;
  std::uint64_t m_;
  std::uint64_t u_;
};

/// J(chi1, chi2) = sum_x chi1(x) chi2(1 - x). Both characters and their
/// product must be nontrivial. Results are memoized per (m, p, u1, u2).
CycloInt jacobi_sum(const ResidueCharacter& chi1, const ResidueCharacter& chi2);

/// Attaches a persistent Jacobi-sum file under dir (empty path detaches).
void set_jacobi_cache_dir(const std::filesystem::path& dir);
void flush_jacobi_cache();
std::size_t jacobi_cache_size();

/// Roots of Phi_m modulo a prime p = 1 mod m, ordered as h^c for c = 1..m
/// coprime to m where h = g^{(p-1)/m}.
std::vector<std::uint64_t> cyclotomic_roots_mod(std::uint64_t m, std::uint64_t p);

class FiniteDivisor {
 public:
  using Key = std::pair<std::uint64_t, std::uint64_t>;  // (p, r)

  explicit FiniteDivisor(std::uint64_t m) : m_(m) {}
  static FiniteDivisor prime(std::uint64_t m, std::uint64_t p, std::uint64_t r);

  std::uint64_t modulus() const { return m_; }
  const std::map<Key, Int>& terms() const { return terms_; }
  void add(std::uint64_t p, std::uint64_t r, const Int& mult);

  FiniteDivisor operator+(const FiniteDivisor& o) const;
  FiniteDivisor operator-(const FiniteDivisor& o) const;
  FiniteDivisor scaled(const Int& c) const;
  bool operator==(const FiniteDivisor& o) const { return m_ == o.m_ && terms_ == o.terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Sum of multiplicities over primes above p.
  Int degree_at(std::uint64_t p) const;

  /// sigma_c(p, r) = (p, r^{c^{-1}}).
  FiniteDivisor galois(std::uint64_t c) const;
  /// Action of an integral element of Z[(Z/m)^x].
  FiniteDivisor act(const GroupRingElement& x) const;
  /// Trace to Q(mu_{m_F}): (p, r) -> (p, r^{m/m_F}).
  FiniteDivisor trace_to(std::uint64_t m_f) const;

  Json to_json() const;
  std::string to_string() const;

 private:
  std::uint64_t m_;
  std::map<Key, Int> terms_;
};

/// Divisor of alpha supported above the listed primes (each = 1 mod m).
/// Checks that the norm of alpha is supported on them and that local
/// valuations sum to v_p of the norm.
FiniteDivisor principal_divisor(const CycloFrac& alpha, const std::vector<std::uint64_t>& support);
FiniteDivisor principal_divisor(const CycloInt& alpha, const std::vector<std::uint64_t>& support);

struct BrumerStarkElement {
  CycloFrac value;
  std::uint64_t b = 0;
  std::uint64_t m = 0;
  std::uint64_t p = 0;
  std::uint64_t r = 0;  // root indexing the prime w
  std::uint64_t u = 1;  // character exponent
  bool up_to_root_of_unity = true;
  /// Twist applied by the congruence normalization: (-1)^sign zeta_m^t.
  int twist_sign = 0;
  std::uint64_t twist_t = 0;
  /// Factors of g(chi)^b / g(chi^b) used, each described as text.
  std::vector<std::string> factors;

  Json to_json() const;
};

/// g(chi)^b / g(chi^b) as a product of Jacobi sums and Gauss-sum norms.
CycloInt gauss_ratio(std::uint64_t b, const ResidueCharacter& chi, std::vector<std::string>* factors = nullptr);
/// lambda = g(chi)^b / (g(chi^b) p^{(b-1)/2}); b coprime to w_F and p.
BrumerStarkElement bs_element(std::uint64_t b, const ResidueCharacter& chi);

struct BsVerification {
  bool ok = false;
  FiniteDivisor divisor;   // div(lambda)
  FiniteDivisor expected;  // Theta_0(b, m) * w
  FiniteDivisor diff;
};
BsVerification verify_bs(const BrumerStarkElement& lambda);
BsVerification verify_bs_value(const CycloFrac& value, const BrumerStarkElement& datum);

/// Twists lambda by the unique root of unity making it = 1 modulo b.
BrumerStarkElement bs_congruence_normalize(const BrumerStarkElement& lambda);

/// Index t with x = (-1)^s zeta_m^t y, searched over mu_F; nullopt if none.
std::optional<std::pair<int, std::uint64_t>> root_of_unity_ratio(const CycloFrac& x, const CycloFrac& y);

struct EquivarianceResult {
  bool element_equal = false;
  bool divisor_equal = false;
  std::optional<std::pair<int, std::uint64_t>> twist;
};
EquivarianceResult galois_equivariance_check(const BrumerStarkElement& lambda, std::uint64_t c);

bool hecke_multiplicativity_check(std::uint64_t b, std::uint64_t m, std::uint64_t p1, std::uint64_t p2);

/// Norm from Q(mu_{m_E}) to Q(mu_{m_F}), recognized in the subfield basis.
CycloInt norm_to_subfield(const CycloInt& alpha, std::uint64_t m_f);
CycloFrac norm_to_subfield(const CycloFrac& alpha, std::uint64_t m_f);

/// lambda^x for integral x in Z[(Z/m)^x]; negative coefficients use
/// lambda^{-1} = sigma_{-1}(lambda), valid because lambda^{1+j} = 1.
CycloFrac group_ring_power(const CycloFrac& lambda, const GroupRingElement& x);

struct NormRelationResult {
  bool element_ok = false;  // equal up to a root of unity in mu_F
  bool divisor_ok = false;  // exact
  std::optional<std::pair<int, std::uint64_t>> twist;
  FiniteDivisor trace;
  FiniteDivisor expected;
};
/// N_{E/F}(lambda_E) against lambda_F^{(1 - sigma_q^{-1})}, E = Q(mu_{m_F q}).
NormRelationResult norm_relation_check(std::uint64_t b, std::uint64_t m_f, std::uint64_t q, std::uint64_t p);

struct TowerResult {
  bool ok = false;
  std::vector<NormRelationResult> steps;           // n = 0
  std::optional<GroupRingElement> restricted;      // n >= 1: Res Theta_n(b, L prod l_i)
  std::optional<GroupRingElement> predicted;       // Theta_n(b, L) prod (1 - l_i^n sigma_{l_i}^{-1})
  bool commute = true;
};
TowerResult tower_norm_check(std::uint64_t b, std::uint64_t L, const std::vector<std::uint64_t>& lprimes, unsigned n,
                             std::uint64_t p);

struct LambdaStar {
  CycloFrac value;
  std::vector<AnnihilatorCandidate> candidates;
  AnnihilatorDecomposition decomposition;
  FiniteDivisor divisor;
  FiniteDivisor expected;
  bool ok = false;
};
/// lambda*_b(w) for the prime w above a split prime b (b = 1 mod m) attached
/// to the character of exponent u modulo b.
LambdaStar lambda_star(std::uint64_t b, std::uint64_t m, std::uint64_t u = 1);

}  // namespace stickel
