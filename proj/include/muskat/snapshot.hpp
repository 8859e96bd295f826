#pragma once

// Lossless state persistence: one snapshot per line with hex-float
// coefficients and an FNV-1a integrity checksum over the coefficient payload.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/geometry.hpp"
#include "muskat/spectral.hpp"

namespace muskat {

namespace detail {

inline std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw SolverError("snapshot: malformed float field \"" + s + "\"");
  return v;
}

inline std::uint64_t fnv1a64(const std::string& payload) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

struct SnapshotRecord {
  double t = 0.0;
  Vec2 c{};
  SpectralFunction f{0};

  static SnapshotRecord of(const BubbleState& state) {
    return SnapshotRecord{state.t, state.c, state.f};
  }

  BubbleState to_state() const { return BubbleState{f, c, t}; }

  // t=<hex> c=<hex>,<hex> n_max=<int> coeffs=k:re:im;... checksum=<hex64>
  std::string serialize() const {
    std::ostringstream coeffs;
    for (int k = 0; k <= f.n_max(); ++k) {
      if (k > 0) coeffs << ';';
      coeffs << k << ':' << detail::hex_double(f.coef(k).real()) << ':'
             << detail::hex_double(f.coef(k).imag());
    }
    const std::string payload = coeffs.str();
    std::ostringstream line;
    char sum[24];
    std::snprintf(sum, sizeof sum, "%016" PRIx64, detail::fnv1a64(payload));
    line << "t=" << detail::hex_double(t) << " c=" << detail::hex_double(c.x) << ','
         << detail::hex_double(c.y) << " n_max=" << f.n_max() << " coeffs=" << payload
         << " checksum=" << sum;
    return line.str();
  }

  static SnapshotRecord deserialize(const std::string& line) {
    auto field = [&line](const std::string& name) {
      const std::string tag = name + "=";
      const std::size_t at = line.find(tag);
      if (at == std::string::npos) throw SolverError("snapshot: missing field " + name);
      const std::size_t from = at + tag.size();
      const std::size_t to = line.find(' ', from);
      return line.substr(from, to == std::string::npos ? std::string::npos : to - from);
    };

    SnapshotRecord rec;
    rec.t = detail::parse_hex_double(field("t"));
    const std::string cs = field("c");
    const std::size_t comma = cs.find(',');
    if (comma == std::string::npos) throw SolverError("snapshot: malformed pole field");
    rec.c = {detail::parse_hex_double(cs.substr(0, comma)),
             detail::parse_hex_double(cs.substr(comma + 1))};
    const int n_max = std::atoi(field("n_max").c_str());
    if (n_max < 0 || n_max > 100000) throw SolverError("snapshot: implausible n_max");

    const std::string payload = field("coeffs");
    char expect[24];
    std::snprintf(expect, sizeof expect, "%016" PRIx64, detail::fnv1a64(payload));
    if (field("checksum") != expect) {
      throw SolverError("snapshot: checksum mismatch, record corrupted");
    }

    rec.f = SpectralFunction(n_max);
    std::istringstream items(payload);
    std::string item;
    int count = 0;
    while (std::getline(items, item, ';')) {
      const std::size_t c1 = item.find(':');
      const std::size_t c2 = item.find(':', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) {
        throw SolverError("snapshot: malformed coefficient entry");
      }
      const int k = std::atoi(item.substr(0, c1).c_str());
      const double re = detail::parse_hex_double(item.substr(c1 + 1, c2 - c1 - 1));
      const double im = detail::parse_hex_double(item.substr(c2 + 1));
      rec.f.set_coef(k, Complex{re, im});
      ++count;
    }
    if (count != n_max + 1) throw SolverError("snapshot: coefficient count mismatch");
    return rec;
  }
};

inline void save_snapshot(const std::string& path, const BubbleState& state) {
  std::ofstream out(path);
  if (!out) throw SolverError("snapshot: cannot write " + path);
  out << SnapshotRecord::of(state).serialize() << '\n';
}

inline BubbleState load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SolverError("snapshot: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw SolverError("snapshot: empty file " + path);
  return SnapshotRecord::deserialize(line).to_state();
}

}  // namespace muskat
