#include <gtest/gtest.h>

#include <random>

#include "stickel/kshadow.hpp"
#include "stickel/stickelberger.hpp"

using namespace stickel;

namespace {

Int to_int(std::uint64_t x) { return Int(static_cast<unsigned long>(x)); }

// Largest l^e with a^n = 1 mod l^e for every unit a; this is w_n(Q_l)_l and
// also w_n(Q)_l.
Int brute_w(long n, std::uint64_t l) {
  int best = 0;
  for (int e = 1; e <= 6; ++e) {
    std::uint64_t le = 1;
    for (int i = 0; i < e; ++i) le *= l;
    bool ok = true;
    for (std::uint64_t a = 1; a < le && ok; ++a) {
      if (a % l == 0) continue;
      ok = powmod_u64(a, static_cast<std::uint64_t>(n), le) == 1 % le;
    }
    if (!ok) break;
    best = e;
  }
  return ipow(to_int(l), best);
}

// Regular primes below 37 and the classical zeta values they see.
Int oracle_div(unsigned n, std::uint64_t l) {
  Rat zeta = -bernoulli(n + 1) / Rat(n + 1);
  Rat x = Rat(brute_w(n + 1, l)) * zeta;
  x.canonicalize();
  if (x == 0) return 1;
  auto v = *padic_val(x, l);
  return v > 0 ? ipow(to_int(l), v) : Int(1);
}

}  // namespace

TEST(KShadow, FiniteFieldOrders) {
  for (std::uint64_t q : {2ULL, 3ULL, 4ULL, 9ULL, 11ULL, 149ULL})
    for (unsigned n = 1; n <= 6; ++n) EXPECT_EQ(k_order(q, n), ipow(to_int(q), n) - 1);
  auto g = k_group(11, 2, 5);
  EXPECT_EQ(g.order, Int(120));
  EXPECT_EQ(g.l_part_exponent, 1);
  EXPECT_EQ(k_group(149, 31, 37).l_part_exponent, padic_val(k_order(149, 31), 37));
}

TEST(KShadow, WnGlobalAndLocal) {
  for (long n = 1; n <= 12; ++n)
    for (std::uint64_t l : {2ULL, 3ULL, 5ULL, 7ULL}) {
      EXPECT_EQ(w_n_local(n, l), brute_w(n, l)) << n << " " << l;
      EXPECT_EQ(w_n_global(1, n, l), brute_w(n, l)) << n << " " << l;
    }
  EXPECT_EQ(w_n_global(5, 1, 5), Int(5));
  EXPECT_EQ(w_n_global(5, 5, 5), Int(25));
  EXPECT_EQ(w_n_global(4, 1, 2), Int(4));
}

TEST(KShadow, IndexFormulaIsOne) {
  for (long n = 1; n <= 10; ++n)
    for (std::uint64_t l : {3ULL, 5ULL, 7ULL, 11ULL}) EXPECT_EQ(index_formula(n, l), Rat(1));
}

TEST(KShadow, DivisibleElementOrders) {
  for (std::uint64_t l : {3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL})
    for (unsigned n = 1; n + 1 < l; n += 2) {
      auto d = div_order(n, l);
      EXPECT_EQ(d.order, Int(1)) << l << " " << n;
      EXPECT_EQ(d.order, oracle_div(n, l));
    }
  auto d = div_order(31, 37);
  EXPECT_EQ(d.order, Int(37));
  EXPECT_EQ(d.order, oracle_div(31, 37));
  EXPECT_TRUE(d.hypothesis_ok);
  EXPECT_THROW(div_order(2, 37), InvalidInput);
}

TEST(KShadow, GammaCertificates) {
  for (std::uint64_t l : {3ULL, 7ULL})
    for (int k = 1; k <= 2; ++k)
      for (unsigned n = 1; n <= 5; ++n)
        for (std::uint64_t f : {1ULL, 5ULL}) {
          auto g = AbelianGaloisGroup::make(f);
          auto gl = gamma_l(n, f, l, g, k);
          EXPECT_TRUE(gl.certified);
          EXPECT_EQ(gl.factor * gl.gamma, GroupRingElement::identity(g, CoeffDomain::modular(l, k)));
        }
  auto empty = gamma_l(1, 15, 3, AbelianGaloisGroup::make(15), 1);
  EXPECT_TRUE(empty.empty);
}

TEST(KShadow, RestrictionIdentityGrid) {
  int cases = 0;
  for (std::uint64_t f : {1ULL, 5ULL})
    for (std::uint64_t l : {3ULL, 7ULL})
      for (int k = 1; k <= 2; ++k)
        for (unsigned n = 0; n <= 5; ++n)
          for (std::uint64_t b : {2ULL, 11ULL, 13ULL}) {
            if (gcd_u64(b, f * l) != 1) continue;
            auto r = restriction_gamma_check(n, b, f, l, k);
            EXPECT_TRUE(r.holds) << f << " " << l << " " << k << " " << n << " " << b;
            if (r.holds_mod) EXPECT_TRUE(*r.holds_mod);
            ++cases;
          }
  EXPECT_GT(cases, 100);
}

TEST(KShadow, InducedModule) {
  auto g = AbelianGaloisGroup::make(13);
  InducedModule mod(g, 5, 2, 3);
  EXPECT_EQ(mod.cosets(), 3u);
  EXPECT_EQ(mod.residue_degree(), 4u);
  EXPECT_EQ(mod.k(), 1);
  EXPECT_TRUE(frobenius_action_check(mod));

  std::mt19937 rng(5);
  std::uniform_int_distribution<int> c(-4, 4);
  auto xi = mod.generator();
  for (int trial = 0; trial < 10; ++trial) {
    GroupRingElement x(g), y(g);
    for (std::size_t i = 0; i < g->order(); ++i) {
      x.set(i, Rat(c(rng)));
      y.set(i, Rat(c(rng)));
    }
    EXPECT_EQ(mod.act(x + y, xi), mod.add(mod.act(x, xi), mod.act(y, xi)));
    EXPECT_EQ(mod.act(x * y, xi), mod.act(x, mod.act(y, xi)));
  }
  auto theta0 = theta(g, 1, 2, 13).element;
  auto be = boundary_exponent(mod, xi, theta0, 0);
  EXPECT_EQ(be.size(), mod.cosets());
}

TEST(KShadow, InducedModuleTrivialWhenLMissesTheOrder) {
  // 11 splits in Q(mu_5) and 11 - 1 = 10 has no 3-torsion.
  InducedModule mod(AbelianGaloisGroup::make(5), 11, 1, 3);
  EXPECT_EQ(mod.k(), 0);
  EXPECT_TRUE(frobenius_action_check(mod));
}
