#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include "agrnn/agrnn.hpp"

using namespace agrnn;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void expect_bit_identical(const CellParams& a, const CellParams& b) {
  ASSERT_EQ(a.gates.size(), b.gates.size());
  for (std::size_t k = 0; k < a.gates.size(); ++k) {
    auto wa = a.gates[k].W.span(), wb = b.gates[k].W.span();
    for (std::size_t i = 0; i < wa.size(); ++i) EXPECT_TRUE(same_bits(wa[i], wb[i]));
    auto ua = a.gates[k].U.span(), ub = b.gates[k].U.span();
    for (std::size_t i = 0; i < ua.size(); ++i) EXPECT_TRUE(same_bits(ua[i], ub[i]));
    for (std::size_t i = 0; i < a.gates[k].b.size(); ++i)
      EXPECT_TRUE(same_bits(a.gates[k].b[i], b.gates[k].b[i]));
  }
}

std::string saved(const CellParams& p, const ReadoutParams* r = nullptr) {
  std::ostringstream os;
  save_params(os, p, r);
  return os.str();
}

LoadedParams parse(const std::string& s) {
  std::istringstream is(s);
  return load_params(is);
}

}  // namespace

TEST(Serialize, RoundTripIsBitExactForEveryKind) {
  Rng rng(1);
  for (auto kind : kAllCellKinds) {
    auto p = make_cell_params(kind, 3, 4);
    init_glorot(p, rng);
    p.gates[0].W(0, 0) = std::numeric_limits<double>::denorm_min();
    p.gates[0].W(1, 1) = -0.0;
    p.gates[0].b[0] = 1.0 / 3.0;
    p.gates.back().b[p.units - 1] = -1e300;
    auto r = make_readout(4, 2, ActivationKind::Softmax);
    init_glorot(r, rng);
    r.b[1] = std::nextafter(0.1, 1.0);

    auto back = parse(saved(p, &r));
    EXPECT_EQ(back.cell, p) << to_string(kind);
    expect_bit_identical(back.cell, p);
    ASSERT_TRUE(back.readout.has_value());
    EXPECT_EQ(*back.readout, r);
    EXPECT_TRUE(same_bits(back.readout->b[1], r.b[1]));
  }
}

TEST(Serialize, ReadoutIsOptional) {
  auto p = handcrafted_solver();
  auto back = parse(saved(p));
  EXPECT_EQ(back.cell, p);
  EXPECT_FALSE(back.readout.has_value());
}

TEST(Serialize, FileRoundTrip) {
  auto path = (std::filesystem::temp_directory_path() / "agrnn_serialize_test.txt").string();
  Rng rng(2);
  auto p = make_cell_params(CellKind::ALstm, 2, 3);
  init_glorot(p, rng);
  save_params(path, p);
  EXPECT_EQ(load_params(path).cell, p);
  std::filesystem::remove(path);
  EXPECT_THROW(load_params(path), std::runtime_error);
}

TEST(Serialize, RejectsMalformedInput) {
  Rng rng(3);
  auto p = make_cell_params(CellKind::Gru, 2, 2);
  init_glorot(p, rng);
  const std::string good = saved(p);

  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("not-params 1\n"), FormatError);
  EXPECT_THROW(parse("agrnn-params 2\n"), FormatError);

  auto replace = [&](const std::string& from, const std::string& to) {
    auto s = good;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
  };
  EXPECT_THROW(parse(replace("kind gru", "kind transformer")), FormatError);
  EXPECT_THROW(parse(replace("units 2", "units 3")), FormatError);
  EXPECT_THROW(parse(replace("gate reset", "gate update")), FormatError);
  EXPECT_THROW(parse(replace("end", "fin")), FormatError);
  EXPECT_THROW(parse(good.substr(0, good.size() / 2)), FormatError);

  auto bad_number = good;
  bad_number.replace(bad_number.find("0x"), 2, "zz");
  EXPECT_THROW(parse(bad_number), FormatError);
}

TEST(Serialize, RejectsReadoutShape) {
  auto p = handcrafted_solver();
  auto r = make_readout(2, 1, ActivationKind::Identity);
  EXPECT_THROW(parse(saved(p, &r)), FormatError);
}
