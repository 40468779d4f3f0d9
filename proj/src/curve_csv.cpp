#include "reserve/curve_csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reserve::pricing {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string curve_to_csv(const PriceCurve& curve) {
  std::ostringstream os;
  os << "n,alpha,price,superrep,gap,u_no_claim,iterations\n";
  for (const PricePoint& pt : curve.points)
    os << pt.index << ',' << fmt(pt.alpha) << ',' << fmt(pt.price) << ','
       << fmt(curve.superrep) << ',' << fmt(pt.gap) << ','
       << fmt(pt.u_no_claim) << ',' << pt.iterations << '\n';
  return os.str();
}

void write_curve_csv(const std::string& path, const PriceCurve& curve) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "'");
      out << curve_to_csv(curve);
      if (!out.flush())
        throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

PriceCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line != "n,alpha,price,superrep,gap,u_no_claim,iterations")
    throw std::runtime_error("unexpected CSV header in '" + path + "'");

  PriceCurve curve;
  bool have_superrep = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    auto next = [&]() {
      if (!std::getline(row, field, ','))
        throw std::runtime_error("short CSV row in '" + path + "'");
      return field;
    };
    PricePoint pt;
    pt.index = std::stoul(next());
    pt.alpha = std::stod(next());
    pt.price = std::stod(next());
    double superrep = std::stod(next());
    pt.gap = std::stod(next());
    pt.u_no_claim = std::stod(next());
    pt.iterations = std::stoi(next());
    if (!have_superrep) {
      curve.superrep = superrep;
      have_superrep = true;
    }
    curve.points.push_back(pt);
  }
  if (!curve.points.empty()) {
    curve.final_gap = curve.points.back().gap;
    curve.gaps_nonincreasing = true;
    for (std::size_t k = 1; k < curve.points.size(); ++k)
      if (curve.points[k].gap > curve.points[k - 1].gap + 1e-12)
        curve.gaps_nonincreasing = false;
  }
  return curve;
}

}  // namespace reserve::pricing
