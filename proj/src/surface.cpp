#include "surfwave/surface.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace surfwave {

double SurfaceConfig::effective_permittivity() const {
  return surfwave::effective_permittivity(dielectric.eps_r, porosity(cavities));
}

SurfaceWaveSolution SurfaceConfig::mode(double f) const {
  return solve_surface_wave(f, dielectric, ground, cavities);
}

namespace {

// PTFE eps_r is not part of the prototype data; 2.1 is a nominal value.
constexpr std::string_view kBuiltinMaterials = R"(# metals: name sigma_S_per_m
silver_ink 3.15e6
galinstan 3.46e6
copper 59.6e6
pec inf
# dielectrics: name eps_r tan_delta ref_freq_hz
resin 2.8 0.0155 26e9
ptfe 2.1 0.00005 26e9
)";

double parse_number(const std::string& tok, int line) {
  if (tok == "inf" || tok == "INF" || tok == "Inf") {
    return std::numeric_limits<double>::infinity();
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) {
    throw std::invalid_argument("materials line " + std::to_string(line) + ": bad number '" +
                                tok + "'");
  }
  return v;
}

}  // namespace

MaterialDb MaterialDb::builtin() { return parse(kBuiltinMaterials); }

MaterialDb MaterialDb::parse(std::string_view text) {
  MaterialDb db;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) {
      raw.erase(hash);
    }
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) {
      tok.push_back(t);
    }
    if (tok.empty()) {
      continue;
    }
    if (tok.size() == 2) {
      MetalSpec m{parse_number(tok[1], line_no)};
      m.validate();
      db.metals_[tok[0]] = m;
    } else if (tok.size() == 4) {
      DielectricMaterial d{parse_number(tok[1], line_no), parse_number(tok[2], line_no),
                           parse_number(tok[3], line_no)};
      if (!(d.eps_r > 1.0) || d.tan_delta < 0.0 || !(d.ref_freq > 0.0)) {
        throw std::invalid_argument("materials line " + std::to_string(line_no) +
                                    ": invalid dielectric values");
      }
      db.dielectrics_[tok[0]] = d;
    } else {
      throw std::invalid_argument("materials line " + std::to_string(line_no) +
                                  ": expected 2 (metal) or 4 (dielectric) fields");
    }
  }
  return db;
}

MaterialDb MaterialDb::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open material file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const MetalSpec& MaterialDb::metal(const std::string& name) const {
  auto it = metals_.find(name);
  if (it == metals_.end()) {
    throw std::out_of_range("unknown metal '" + name + "'");
  }
  return it->second;
}

const DielectricMaterial& MaterialDb::dielectric(const std::string& name) const {
  auto it = dielectrics_.find(name);
  if (it == dielectrics_.end()) {
    throw std::out_of_range("unknown dielectric '" + name + "'");
  }
  return it->second;
}

std::string MaterialDb::to_text() const {
  std::ostringstream out;
  out << std::setprecision(10);
  for (const auto& [name, m] : metals_) {
    out << name << ' ';
    if (m.is_pec()) {
      out << "inf";
    } else {
      out << m.sigma;
    }
    out << '\n';
  }
  for (const auto& [name, d] : dielectrics_) {
    out << name << ' ' << d.eps_r << ' ' << d.tan_delta << ' ' << d.ref_freq << '\n';
  }
  return out.str();
}

}  // namespace surfwave
