#include "heston/verdict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace heston {

const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::inconclusive: return "inconclusive";
    case Status::fail: return "fail";
  }
  return "?";
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void VerdictReport::merge(const VerdictReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

bool VerdictReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == Status::fail; });
}

std::size_t VerdictReport::count(Status s) const {
  return std::count_if(checks.begin(), checks.end(), [s](const CheckResult& c) { return c.status == s; });
}

std::string VerdictReport::csv() const {
  std::ostringstream os;
  os << "check,pass,worst_margin,worst_location\n";
  for (const auto& c : checks)
    os << c.name << ',' << to_string(c.status) << ',' << fmt_num(c.worst_margin) << ",\""
       << c.worst_location << "\"\n";
  return os.str();
}

std::string VerdictReport::summary() const {
  std::ostringstream os;
  os << (passed() ? "PASS" : "FAIL") << ' ' << suite << ": " << count(Status::pass) << " pass, "
     << count(Status::inconclusive) << " inconclusive, " << count(Status::fail) << " fail";
  return os.str();
}

}  // namespace heston
