#include "randquad/random_systems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace randquad {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::vector<double> parse_numbers(std::string_view args, std::string_view spec) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= args.size()) {
    const std::size_t comma = args.find(',', start);
    const std::string_view field = args.substr(start, comma == std::string_view::npos ? args.npos : comma - start);
    double v = 0.0;
    if (!parse_double(field, v)) {
      throw Error(ErrorCode::ConfigError, "law '" + std::string(spec) + "': bad number '" + std::string(field) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

ComplexPoint unit_disc_point(double u1, double u2) noexcept {
  const double r = std::sqrt(u1);
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

ParameterLaw::ParameterLaw(UniformDisc law) : variant_(law) {
  if (!(law.radius >= 0.0) || !std::isfinite(law.radius)) {
    throw std::invalid_argument("uniform disc radius must be finite and non-negative");
  }
  radius_bound_ = std::abs(law.center) + law.radius;
}

ParameterLaw::ParameterLaw(Perturbation law) : variant_(law), radius_bound_(std::abs(law.c0) + std::abs(law.lambda)) {}

ParameterLaw::ParameterLaw(PointMass law) : variant_(law), radius_bound_(std::abs(law.c)) {}

ParameterLaw::ParameterLaw(ExplicitList law) : variant_(std::move(law)) {
  const auto& values = std::get<ExplicitList>(variant_).values;
  if (values.empty()) throw std::invalid_argument("explicit parameter list is empty");
  for (const ComplexPoint& c : values) radius_bound_ = std::max(radius_bound_, std::abs(c));
}

std::string ParameterLaw::tag() const {
  return std::visit(
      Overloaded{
          [](const UniformDisc& u) {
            return "uniform(" + num(u.center.real()) + "," + num(u.center.imag()) + "," + num(u.radius) + ")";
          },
          [](const Perturbation& p) {
            return "perturb(" + num(p.c0.real()) + "," + num(p.c0.imag()) + "," + num(p.lambda.real()) + "," +
                   num(p.lambda.imag()) + ")";
          },
          [](const PointMass& p) { return "point(" + num(p.c.real()) + "," + num(p.c.imag()) + ")"; },
          [](const ExplicitList& l) {
            if (!l.source.empty()) return "list(" + l.source + ")";
            std::string s = "values(";
            for (std::size_t i = 0; i < l.values.size(); ++i) {
              if (i) s += ";";
              s += num(l.values[i].real()) + "," + num(l.values[i].imag());
            }
            return s + ")";
          },
      },
      variant_);
}

ComplexPoint ParameterLaw::draw(std::size_t k, double u1, double u2) const {
  return std::visit(Overloaded{
                        [&](const UniformDisc& u) { return u.center + u.radius * unit_disc_point(u1, u2); },
                        [&](const Perturbation& p) { return p.c0 + p.lambda * unit_disc_point(u1, u2); },
                        [](const PointMass& p) { return p.c; },
                        [k](const ExplicitList& l) { return l.values[k % l.values.size()]; },
                    },
                    variant_);
}

StratifiedStream::StratifiedStream(const ParameterLaw& law, SeedSpec seed, std::size_t stratum, std::size_t strata)
    : base_(law, seed) {
  if (strata == 0 || stratum >= strata) throw std::invalid_argument("StratifiedStream: stratum out of range");
  const std::uint64_t key = seed.subseed();
  const double u = to_unit(counter_bits(key, 0));
  const double u1 = (static_cast<double>(stratum) + u) / static_cast<double>(strata);
  first_ = law.draw(0, std::min(u1, std::nextafter(1.0, 0.0)), to_unit(counter_bits(key, 1)));
}

ComplexPoint StratifiedStream::at(std::size_t k) const { return k == 0 ? first_ : base_.at(k); }

ParameterSequence sample_prefix(const ParameterLaw& law, SeedSpec seed, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample_prefix: n must be positive");
  return materialize(ParameterStream(law, seed), n, law.tag(), seed);
}

ParameterSequence shift(const ParameterSequence& omega, std::size_t k) {
  if (k > omega.size()) {
    throw Error(ErrorCode::PrefixTooShort,
                "shift by " + std::to_string(k) + " of a prefix of length " + std::to_string(omega.size()));
  }
  std::vector<ComplexPoint> rest(omega.prefix().begin() + static_cast<std::ptrdiff_t>(k), omega.prefix().end());
  return ParameterSequence(std::move(rest), omega.radius_bound(), omega.law_tag(), omega.seed(), omega.offset() + k);
}

ParameterLaw rotate_law(const ParameterLaw& law, ComplexPoint eta) {
  const auto* p = std::get_if<Perturbation>(&law.variant());
  if (!p) throw Error(ErrorCode::NotPerturbation, "rotate_law needs a perturb(...) law, got " + law.tag());
  if (std::abs(std::abs(eta) - 1.0) > 1e-12) throw std::invalid_argument("rotate_law: |eta| must be 1");
  return Perturbation{p->c0, eta * p->lambda};
}

std::vector<ComplexPoint> read_parameter_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open parameter list '" + path + "'");
  std::vector<ComplexPoint> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::size_t comma = body.find(',');
    double re = 0.0, im = 0.0;
    const bool ok = comma != std::string_view::npos && parse_double(body.substr(0, comma), re) &&
                    parse_double(body.substr(comma + 1), im);
    if (!ok) {
      if (values.empty() && line_no == 1) continue;  // header
      throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(line_no) + ": expected 're,im'");
    }
    values.emplace_back(re, im);
  }
  if (values.empty()) throw Error(ErrorCode::ConfigError, "parameter list '" + path + "' has no rows");
  return values;
}

ParameterLaw parse_law(std::string_view spec) {
  const std::string_view s = trim(spec);
  const std::size_t open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') {
    throw Error(ErrorCode::ConfigError, "law '" + std::string(spec) + "': expected name(args)");
  }
  const std::string_view name = trim(s.substr(0, open));
  const std::string_view args = s.substr(open + 1, s.size() - open - 2);
  auto expect = [&](const std::vector<double>& v, std::size_t n) {
    if (v.size() != n) {
      throw Error(ErrorCode::ConfigError,
                  "law '" + std::string(spec) + "': expected " + std::to_string(n) + " numbers");
    }
  };
  if (name == "uniform") {
    const auto v = parse_numbers(args, spec);
    expect(v, 3);
    if (v[2] < 0.0) throw Error(ErrorCode::ConfigError, "law '" + std::string(spec) + "': negative radius");
    return UniformDisc{{v[0], v[1]}, v[2]};
  }
  if (name == "perturb") {
    const auto v = parse_numbers(args, spec);
    expect(v, 4);
    return Perturbation{{v[0], v[1]}, {v[2], v[3]}};
  }
  if (name == "point") {
    const auto v = parse_numbers(args, spec);
    expect(v, 2);
    return PointMass{{v[0], v[1]}};
  }
  if (name == "list") {
    const std::string path(trim(args));
    if (path.empty()) throw Error(ErrorCode::ConfigError, "law 'list()' needs a file name");
    return ExplicitList{read_parameter_csv(path), path};
  }
  if (name == "values") {
    // Inline form emitted by ParameterLaw::tag() for lists without a file.
    std::vector<ComplexPoint> values;
    std::size_t start = 0;
    while (start <= args.size()) {
      const std::size_t semi = args.find(';', start);
      const auto pair = parse_numbers(args.substr(start, semi == args.npos ? args.npos : semi - start), spec);
      expect(pair, 2);
      values.emplace_back(pair[0], pair[1]);
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    return ExplicitList{std::move(values), {}};
  }
  throw Error(ErrorCode::ConfigError, "unknown law '" + std::string(name) + "'");
}

}  // namespace randquad
