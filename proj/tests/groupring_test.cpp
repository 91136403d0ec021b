#include <gtest/gtest.h>

#include <random>
#include <set>

#include "stickel/groupring.hpp"

using namespace stickel;

namespace {

GroupRingElement random_element(const GroupPtr& g, std::mt19937& rng, CoeffDomain d = CoeffDomain::rational()) {
  std::uniform_int_distribution<int> c(-9, 9), den(1, 4);
  GroupRingElement x(g, d);
  for (std::size_t i = 0; i < g->order(); ++i) {
    if (d.is_rational())
      x.set(i, Rat(c(rng), den(rng)));
    else
      x.set(i, Rat(c(rng)));
  }
  return x;
}

// Largest l^e such that every a = 1 on F (a in H mod m) has a^n = 1 mod l^e.
Int w_oracle(std::uint64_t m, const std::vector<std::uint64_t>& gens, long n, std::uint64_t l) {
  std::set<std::uint64_t> h{1 % std::max<std::uint64_t>(m, 1)};
  bool grew = true;
  while (grew) {
    grew = false;
    for (auto x : std::vector<std::uint64_t>(h.begin(), h.end()))
      for (auto g : gens) {
        auto y = (x * (g % m)) % m;
        if (h.insert(y).second) grew = true;
      }
  }
  int best = 0;
  for (int e = 1; e <= 6; ++e) {
    std::uint64_t le = 1;
    for (int i = 0; i < e; ++i) le *= l;
    std::uint64_t M = lcm_u64(m, le);
    bool ok = true;
    for (std::uint64_t a = 1; a < M && ok; ++a) {
      if (gcd_u64(a, M) != 1 || !h.count(a % m)) continue;
      std::uint64_t an = 1;
      long nn = n;
      std::uint64_t base = a % le;
      while (nn-- > 0) an = an * base % le;
      if (an % le != 1 % le) ok = false;
    }
    if (!ok) break;
    best = e;
  }
  return ipow(Int(static_cast<unsigned long>(l)), best);
}

}  // namespace

TEST(GroupRing, GaloisGroupStructure) {
  auto g = AbelianGaloisGroup::make(15);
  EXPECT_EQ(g->order(), 8u);
  EXPECT_TRUE(g->is_cm());
  EXPECT_EQ(g->rep(g->conjugation()), 14u);
  for (std::size_t i = 0; i < g->order(); ++i)
    for (std::size_t j = 0; j < g->order(); ++j)
      EXPECT_EQ(g->rep(g->mul(i, j)), g->rep(i) * g->rep(j) % 15);
  auto real = AbelianGaloisGroup::make(7, {6});
  EXPECT_EQ(real->order(), 3u);
  EXPECT_FALSE(real->is_cm());
  EXPECT_EQ(AbelianGaloisGroup::rationals()->order(), 1u);
  EXPECT_THROW(g->index_of(std::uint64_t{5}), InvalidInput);
}

TEST(GroupRing, RingAxioms) {
  std::mt19937 rng(7);
  auto g = AbelianGaloisGroup::make(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_element(g, rng), b = random_element(g, rng), c = random_element(g, rng);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a * GroupRingElement::identity(g), a);
    EXPECT_EQ((a - a).is_zero(), true);
    EXPECT_EQ((a * b).involution(), a.involution() * b.involution());
  }
}

TEST(GroupRing, ModularInverse) {
  std::mt19937 rng(11);
  auto g = AbelianGaloisGroup::make(11);
  auto d = CoeffDomain::modular(5, 3);
  auto one = GroupRingElement::identity(g, d);
  int found = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto x = random_element(g, rng, d);
    x = x.scaled(5) + one;  // = 1 mod 5, hence a unit
    EXPECT_EQ(x * x.inverse(), one);
    ++found;
  }
  EXPECT_EQ(found, 30);
  auto nonunit = GroupRingElement::sigma(g, 2, d).scaled(5);
  EXPECT_ANY_THROW(nonunit.inverse());
}

TEST(GroupRing, ReductionAndJson) {
  auto g = AbelianGaloisGroup::make(5);
  GroupRingElement x(g);
  x.set(g->index_of(std::uint64_t{2}), Rat(1, 3));
  x.set(g->index_of(std::uint64_t{4}), Rat(-7));
  auto r = x.reduce(5, 2);
  EXPECT_EQ(r.residue(g->index_of(std::uint64_t{2})), Int(17));
  EXPECT_EQ(r.residue(g->index_of(std::uint64_t{4})), Int(18));
  EXPECT_EQ(GroupRingElement::from_json(x.to_json()), x);
  EXPECT_EQ(GroupRingElement::from_json(r.to_json()), r);
  EXPECT_THROW(x.scaled(Rat(1, 5)).reduce(5, 2), InvalidInput);
  EXPECT_EQ(*x.scaled(Rat(1, 5)).non_integral_at(5), g->index_of(std::uint64_t{2}));
}

TEST(GroupRing, WnAgainstOracle) {
  struct F {
    std::uint64_t m;
    std::vector<std::uint64_t> h;
  };
  for (const auto& f : {F{1, {}}, F{3, {}}, F{4, {}}, F{5, {}}, F{7, {6}}, F{15, {}}, F{9, {8}}}) {
    auto g = AbelianGaloisGroup::make(f.m, f.h);
    for (long n = 1; n <= 12; ++n)
      for (std::uint64_t l : {2ULL, 3ULL, 5ULL, 7ULL})
        EXPECT_EQ(w_n_part(*g, n, l), w_oracle(f.m, f.h, n, l)) << f.m << " n=" << n << " l=" << l;
  }
}

TEST(GroupRing, TwistIsMultiplicative) {
  std::mt19937 rng(3);
  auto g = AbelianGaloisGroup::make(25);
  auto d = CoeffDomain::modular(5, 2);
  for (long n : {1L, 2L, 3L}) {
    auto x = random_element(g, rng, d), y = random_element(g, rng, d);
    EXPECT_EQ(twist_tn(x * y, n, 5), twist_tn(x, n, 5) * twist_tn(y, n, 5));
    EXPECT_EQ(twist_tn(twist_tn(x, n, 5), 1, 5), twist_tn(x, n + 1, 5));
  }
}

TEST(GroupRing, IdempotentsDecomposeOne) {
  auto g = AbelianGaloisGroup::make(7);
  int k = 3;
  auto d = CoeffDomain::modular(7, k);
  GroupRingElement sum(g, d);
  for (long i = 0; i < 6; ++i) {
    auto e = idempotent(i, 7, k, g);
    EXPECT_EQ(e * e, e);
    for (long j = 0; j < i; ++j) EXPECT_TRUE((e * idempotent(j, 7, k, g)).is_zero());
    sum = sum + e;
  }
  EXPECT_EQ(sum, GroupRingElement::identity(g, d));
}

TEST(GroupRing, CharacterValues) {
  auto g = AbelianGaloisGroup::make(11);
  for (std::uint64_t a = 1; a < 11; ++a) {
    auto s = GroupRingElement::sigma(g, a);
    auto v = omega_char_value(s, 3, 11, 4);
    EXPECT_EQ(v, teichmuller(Int(static_cast<unsigned long>(a)), 11, 4).pow(Int(3)));
  }
}

TEST(GroupRing, RestrictionToSubfield) {
  auto big = AbelianGaloisGroup::make(15);
  auto small = AbelianGaloisGroup::make(5);
  auto x = GroupRingElement::sigma(big, 7) + GroupRingElement::sigma(big, 2).scaled(3);
  auto r = restrict(x, small);
  EXPECT_EQ(r, GroupRingElement::sigma(small, 2).scaled(4));
}

TEST(GroupRing, EulerFactorAndAnnihilatorDecomposition) {
  auto g = AbelianGaloisGroup::make(5);
  auto e = euler_factor(g, Int(3), 3);
  EXPECT_EQ(e, GroupRingElement::identity(g) - GroupRingElement::sigma(g, 2).scaled(3));
  std::vector<AnnihilatorCandidate> cands{{Int(7), 2}, {Int(11), 1}, {Int(13), 3}};
  auto dec = annihilator_decomposition(g, Int(3), 3, cands, Int(10));
  ASSERT_TRUE(dec.has_value());
  GroupRingElement sum(g);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    EXPECT_TRUE(dec->x[i].has_integer_coeffs());
    sum = sum + dec->x[i] * euler_factor(g, cands[i].norm, cands[i].sigma);
  }
  EXPECT_EQ(sum, euler_factor(g, Int(3), 3));
}
