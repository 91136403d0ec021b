#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "stickel/arith.hpp"

using namespace stickel;

namespace {

bool trial_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Akiyama-Tanigawa; produces B_1 = +1/2.
std::vector<Rat> akiyama_tanigawa(unsigned nmax) {
  std::vector<Rat> out, a(nmax + 1);
  for (unsigned m = 0; m <= nmax; ++m) {
    a[m] = Rat(1, m + 1);
    for (unsigned j = m; j >= 1; --j) {
      a[j - 1] = Rat(j) * (a[j - 1] - a[j]);
      a[j - 1].canonicalize();
    }
    out.push_back(a[0]);
  }
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("stickel-arith-" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(Arith, ModularBasics) {
  EXPECT_EQ(gcd_u64(84, 36), 12u);
  EXPECT_EQ(lcm_u64(4, 6), 12u);
  EXPECT_EQ(powmod_u64(3, 200, 1000003), powmod_u64(9, 100, 1000003));
  for (std::uint64_t a = 1; a < 37; ++a) EXPECT_EQ(a * invmod_u64(a, 37) % 37, 1u);
  EXPECT_THROW(invmod_u64(6, 9), InvalidInput);
}

TEST(Arith, PrimalityMatchesTrialDivision) {
  for (std::uint64_t n = 0; n < 5000; ++n) EXPECT_EQ(is_prime_u64(n), trial_prime(n)) << n;
  EXPECT_TRUE(is_prime_u64(1000000007ULL));
  EXPECT_FALSE(is_prime_u64(1000000007ULL * 3));
}

TEST(Arith, PhiAndFactors) {
  for (std::uint64_t n = 1; n < 300; ++n) {
    std::uint64_t c = 0;
    for (std::uint64_t a = 1; a <= n; ++a) c += gcd_u64(a, n) == 1;
    EXPECT_EQ(euler_phi(n), c) << n;
  }
  EXPECT_EQ(prime_factors(360), (std::vector<std::uint64_t>{2, 3, 5}));
  EXPECT_EQ(radical(360), 30u);
}

TEST(Arith, PrimitiveRoots) {
  for (std::uint64_t p : {3ULL, 5ULL, 7ULL, 37ULL, 149ULL, 191ULL}) {
    auto g = least_primitive_root(p);
    EXPECT_EQ(multiplicative_order(g, p), p - 1);
    for (std::uint64_t h = 2; h < g; ++h) EXPECT_LT(multiplicative_order(h, p), p - 1);
  }
}

TEST(Arith, Valuations) {
  EXPECT_EQ(val_u64(250, 5), 3);
  EXPECT_ANY_THROW(padic_val(Int(0), 3));
  EXPECT_EQ(*padic_val(Rat(9, 50), 5), -2);
  EXPECT_EQ(*padic_val(Rat(9, 50), 3), 2);
  EXPECT_FALSE(padic_val(Rat(0), 3).has_value());
}

TEST(Arith, RationalsRoundTrip) {
  Rat x = parse_rat("-691/2730");
  EXPECT_EQ(to_string(x), "-691/2730");
  EXPECT_EQ(to_string(parse_rat("6/4")), "3/2");
  EXPECT_THROW(parse_rat("1/0"), InvalidInput);
  EXPECT_THROW(parse_rat("abc"), InvalidInput);
  EXPECT_EQ(rat_mod_prime_power(Rat(1, 3), 5, 2), Int(17));
  EXPECT_THROW(rat_mod_prime_power(Rat(1, 5), 5, 2), InvalidInput);
}

TEST(Arith, BernoulliAgainstOracle) {
  auto at = akiyama_tanigawa(60);
  EXPECT_EQ(bernoulli(1), Rat(-1, 2));
  for (unsigned n = 0; n <= 60; ++n) {
    if (n == 1) continue;
    EXPECT_EQ(bernoulli(n), at[n]) << n;
  }
  EXPECT_EQ(bernoulli(12), Rat(-691, 2730));
}

TEST(Arith, BernoulliPolynomial) {
  Rat x(2, 7);
  for (unsigned n = 0; n < 12; ++n) {
    Rat sum = 0;
    for (unsigned k = 0; k <= n; ++k) {
      Rat xp = 1;
      for (unsigned e = 0; e < n - k; ++e) xp *= x;
      sum += Rat(binomial(n, k)) * bernoulli(k) * xp;
    }
    sum.canonicalize();
    EXPECT_EQ(bernoulli_poly(n, x), sum) << n;
  }
  // B_n(1 - x) = (-1)^n B_n(x)
  for (unsigned n = 1; n < 10; ++n) {
    Rat lhs = bernoulli_poly(n, Rat(1) - x);
    Rat rhs = bernoulli_poly(n, x) * (n % 2 ? -1 : 1);
    rhs.canonicalize();
    EXPECT_EQ(lhs, rhs);
  }
}

TEST(Arith, Teichmuller) {
  for (std::uint64_t l : {5ULL, 7ULL, 37ULL}) {
    for (std::uint64_t a = 1; a < l; ++a) {
      auto w = teichmuller(Int(static_cast<unsigned long>(a)), l, 6);
      EXPECT_EQ(w.pow(Int(static_cast<unsigned long>(l - 1))).value(), Int(1));
      EXPECT_EQ(mod_floor(w.value() - a, Int(static_cast<unsigned long>(l))), 0);
    }
  }
}

TEST(Arith, HenselLift) {
  IntPoly f{Int(-2), Int(0), Int(1)};  // x^2 - 2
  Int r = hensel_lift_root(f, Int(3), Int(7), 6);
  Int mod = ipow(Int(7), 6);
  EXPECT_EQ(eval_poly_mod(f, r, mod), 0);
  EXPECT_EQ(mod_floor(r, Int(7)), 3);
}

TEST(Arith, PadicResidueArithmetic) {
  PadicResidue a(Int(10), 5, 3), b(Int(120), 5, 3);
  EXPECT_EQ((a * b).value(), Int(1200 % 125));
  EXPECT_EQ(a.valuation(), 1);
  EXPECT_EQ(PadicResidue(Int(0), 5, 3).valuation(), 3);
  EXPECT_THROW(a + PadicResidue(Int(1), 7, 3), InvalidInput);
}

TEST(Arith, BernoulliCachePersistsAndRejectsCorruption) {
  auto dir = scratch_dir("cache");
  auto file = dir / "bernoulli.txt";
  {
    BernoulliCache c(file);
    EXPECT_TRUE(c.load());
    c.put(12, Rat(-691, 2730));
    c.put(4, Rat(-1, 30));
    c.save();
  }
  BernoulliCache again(file);
  ASSERT_TRUE(again.load());
  EXPECT_EQ(again.size(), 2u);
  EXPECT_EQ(*again.get(12), Rat(-691, 2730));

  std::ofstream(file, std::ios::app) << "garbage line\n";
  BernoulliCache broken(file);
  EXPECT_FALSE(broken.load());
  EXPECT_EQ(broken.size(), 0u);
  std::filesystem::remove_all(dir);
}
