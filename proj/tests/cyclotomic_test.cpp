#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "stickel/cyclotomic.hpp"
#include "stickel/stickelberger.hpp"

using namespace stickel;

namespace {

Int to_int(std::uint64_t x) { return Int(static_cast<unsigned long>(x)); }

// Brute-force Jacobi sum from a freshly built discrete log table.
CycloInt brute_jacobi(std::uint64_t m, std::uint64_t p, std::uint64_t i, std::uint64_t j) {
  std::uint64_t g = 2;
  while (multiplicative_order(g, p) != p - 1) ++g;
  std::vector<std::uint64_t> dl(p);
  std::uint64_t x = 1;
  for (std::uint64_t t = 0; t + 1 < p; ++t, x = x * g % p) dl[x] = t;
  std::vector<Int> c(m, Int(0));
  for (std::uint64_t y = 2; y < p; ++y) c[(i * dl[y] + j * dl[p + 1 - y]) % m] += 1;
  return CycloInt::from_exponents(m, c);
}

// Valuation of alpha at the prime (p, r): lift r to a root of Phi_m modulo
// p^K by Newton iteration and read off v_p of alpha(R).
long local_valuation(const CycloFrac& alpha, std::uint64_t p, std::uint64_t r) {
  const auto& phi = CycloContext::get(alpha.modulus())->cyclotomic;
  const int K = 40;
  Int pk = ipow(to_int(p), K), R = to_int(r);
  for (int it = 0; it < 8; ++it) {
    Int f = 0, df = 0, xp = 1;
    for (std::size_t d = 0; d < phi.size(); ++d) {
      f += phi[d] * xp;
      if (d + 1 < phi.size()) df += phi[d + 1] * Int(static_cast<unsigned long>(d + 1)) * xp;
      xp = mod_floor(xp * R, pk);
    }
    Int inv;
    mpz_invert(inv.get_mpz_t(), Int(mod_floor(df, pk)).get_mpz_t(), pk.get_mpz_t());
    R = mod_floor(R - f * inv, pk);
  }
  Int v = 0, xp = 1;
  for (const auto& c : alpha.num().coeffs()) {
    v += c * xp;
    xp = mod_floor(xp * R, pk);
  }
  v = mod_floor(v, pk);
  EXPECT_NE(v, 0) << "precision too small";
  return padic_val(v, p) - padic_val(alpha.den(), p);
}

std::uint64_t smallest_b(std::uint64_t m, std::uint64_t p) {
  std::uint64_t w = m % 2 ? 2 * m : m;
  for (std::uint64_t b = 2;; ++b)
    if (is_prime_u64(b) && gcd_u64(b, w) == 1 && b != p) return b;
}

}  // namespace

TEST(Cyclotomic, RingArithmetic) {
  auto z = CycloInt::zeta_power(7, 1);
  auto one = CycloInt::from_int(7, 1);
  EXPECT_EQ((one - z).norm(), Int(7));
  EXPECT_EQ(z.pow(7), one);
  auto a = one + z.scaled(3) - z.pow(4), b = one.scaled(2) - z.pow(2);
  EXPECT_EQ((a * b).norm(), a.norm() * b.norm());
  for (std::uint64_t c : {2ULL, 3ULL, 6ULL}) EXPECT_EQ((a * b).galois(c), a.galois(c) * b.galois(c));
  EXPECT_EQ(CycloInt::from_json(a.to_json()), a);
  EXPECT_EQ((a * b).divided_by(Int(1)), a * b);
  EXPECT_THROW(a.scaled(3).divided_by(Int(2)), InvalidInput);
}

TEST(Cyclotomic, JacobiSumsMatchBruteForce) {
  for (std::uint64_t m : {3ULL, 4ULL, 5ULL, 7ULL, 8ULL, 12ULL}) {
    for (std::uint64_t p = 3; p < 120; ++p) {
      if (!is_prime_u64(p) || p % m != 1) continue;
      ResidueCharacter chi(p, m);
      for (std::uint64_t i = 1; i < m; ++i)
        for (std::uint64_t j = 1; j < m; ++j) {
          if ((i + j) % m == 0) continue;
          auto J = jacobi_sum(chi.pow(static_cast<long>(i)), chi.pow(static_cast<long>(j)));
          ASSERT_EQ(J, brute_jacobi(m, p, i, j)) << m << " " << p << " " << i << " " << j;
          if (gcd_u64(i, m) == 1 && gcd_u64(j, m) == 1 && gcd_u64(i + j, m) == 1)
            EXPECT_EQ(J.norm(), ipow(to_int(p), CycloContext::get(m)->phi / 2));
        }
    }
  }
}

TEST(Cyclotomic, JacobiGolden) {
  ResidueCharacter chi(13, 3);
  auto J = jacobi_sum(chi, chi);
  EXPECT_EQ(J, CycloInt(3, {Int(-4), Int(-3)}));
  auto d = principal_divisor(J, {13});
  EXPECT_EQ(d.degree_at(13), Int(1));
  ResidueCharacter chi4(5, 4);
  EXPECT_EQ(jacobi_sum(chi4, chi4).norm(), Int(5));
}

TEST(Cyclotomic, RootsOfPhiModP) {
  for (std::uint64_t m : {5ULL, 8ULL, 12ULL})
    for (std::uint64_t p : {41ULL, 73ULL, 97ULL}) {
      if (p % m != 1) continue;
      auto roots = cyclotomic_roots_mod(m, p);
      EXPECT_EQ(roots.size(), euler_phi(m));
      for (auto r : roots) EXPECT_EQ(multiplicative_order(r, p), m);
    }
}

TEST(Cyclotomic, BrumerStarkDivisorIdentity) {
  int checked = 0;
  for (std::uint64_t m : {3ULL, 4ULL, 5ULL, 7ULL}) {
    auto g = AbelianGaloisGroup::make(m);
    for (std::uint64_t p = 3; p < 200; ++p) {
      if (!is_prime_u64(p) || p % m != 1) continue;
      std::uint64_t b = smallest_b(m, p);
      auto lam = bs_element(b, ResidueCharacter(p, m));
      auto th = theta(g, 0, b, m).element;
      // Expected: Theta_0 acting on (p, r), with sigma_a (p, r) = (p, r^{1/a}).
      std::map<std::uint64_t, long> expected;
      for (std::size_t i = 0; i < g->order(); ++i) {
        std::uint64_t a = g->rep(i);
        auto root = powmod_u64(lam.r, invmod_u64(a, m), p);
        expected[root] += th.rat(i).get_num().get_si();
      }
      for (auto r : cyclotomic_roots_mod(m, p)) {
        EXPECT_EQ(local_valuation(lam.value, p, r), expected[r]) << "m=" << m << " p=" << p << " r=" << r;
      }
      EXPECT_TRUE(verify_bs(lam).ok);
      EXPECT_TRUE((lam.value * lam.value.galois(m - 1)).is_one());
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Cyclotomic, CongruenceNormalization) {
  for (std::uint64_t p : {11ULL, 31ULL, 41ULL, 61ULL}) {
    auto lam = bs_congruence_normalize(bs_element(3, ResidueCharacter(p, 5)));
    CycloInt diff = lam.value.num() - CycloInt::from_int(5, lam.value.den());
    for (const auto& c : diff.coeffs()) EXPECT_EQ(mod_floor(c, Int(3)), 0) << p;
    EXPECT_TRUE(verify_bs(lam).ok);
  }
}

TEST(Cyclotomic, GaloisEquivarianceAndHecke) {
  auto lam = bs_element(3, ResidueCharacter(11, 5));
  for (std::uint64_t c = 1; c < 5; ++c) {
    auto r = galois_equivariance_check(lam, c);
    EXPECT_TRUE(r.element_equal) << c;
    EXPECT_TRUE(r.divisor_equal) << c;
  }
  EXPECT_TRUE(hecke_multiplicativity_check(3, 5, 11, 31));
  EXPECT_TRUE(hecke_multiplicativity_check(3, 5, 11, 11));
}

TEST(Cyclotomic, NormToSubfield) {
  auto z35 = CycloInt::zeta_power(35, 1);
  EXPECT_EQ(norm_to_subfield(z35, 5), CycloInt::zeta_power(5, 3));
  auto x = CycloInt::from_int(7, 1) - CycloInt::zeta_power(7, 1);
  EXPECT_EQ(norm_to_subfield(x, 1), CycloInt::from_int(1, 7));
}

TEST(Cyclotomic, NormRelation) {
  int count = 0;
  for (std::uint64_t p : {71ULL, 211ULL, 281ULL}) {
    auto r = norm_relation_check(3, 5, 7, p);
    EXPECT_TRUE(r.element_ok) << p;
    EXPECT_TRUE(r.divisor_ok) << p;
    EXPECT_TRUE(r.twist.has_value());
    ++count;
  }
  EXPECT_EQ(count, 3);
}

TEST(Cyclotomic, TowerAndLambdaStar) {
  EXPECT_TRUE(tower_norm_check(3, 5, {7}, 0, 71).ok);
  EXPECT_TRUE(tower_norm_check(3, 5, {7}, 2, 71).ok);
  auto ls = lambda_star(11, 5);
  EXPECT_TRUE(ls.ok);
  EXPECT_EQ(ls.divisor, ls.expected);
}

TEST(Cyclotomic, DivisorGaloisAction) {
  auto d = FiniteDivisor::prime(5, 11, 3);
  for (std::uint64_t a = 1; a < 5; ++a)
    for (std::uint64_t c = 1; c < 5; ++c) EXPECT_EQ(d.galois(a).galois(c), d.galois(a * c % 5));
  EXPECT_EQ(d.act(GroupRingElement::sigma(AbelianGaloisGroup::make(5), 2)), d.galois(2));
}

TEST(Cyclotomic, JacobiCacheSurvivesCorruption) {
  auto dir = std::filesystem::temp_directory_path() / "stickel-jacobi-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  set_jacobi_cache_dir(dir);
  auto J = jacobi_sum(ResidueCharacter(181, 5), ResidueCharacter(181, 5, 2));
  flush_jacobi_cache();
  EXPECT_GT(jacobi_cache_size(), 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "jacobi.txt"));
  std::ofstream(dir / "jacobi.txt", std::ios::trunc) << "not a cache\n";
  set_jacobi_cache_dir(dir);
  EXPECT_EQ(jacobi_sum(ResidueCharacter(181, 5), ResidueCharacter(181, 5, 2)), J);
  set_jacobi_cache_dir({});
  std::filesystem::remove_all(dir);
}

TEST(Cyclotomic, RejectsBadInput) {
  EXPECT_THROW(ResidueCharacter(13, 5), InvalidInput);  // 13 != 1 mod 5
  EXPECT_THROW(ResidueCharacter(15, 7), InvalidInput);
  EXPECT_THROW(bs_element(5, ResidueCharacter(11, 5)), InvalidInput);  // b | w
}
