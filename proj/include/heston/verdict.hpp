#pragma once

#include <string>
#include <vector>

namespace heston {

enum class Status { pass, inconclusive, fail };

const char* to_string(Status s);

struct CheckResult {
  std::string name;
  Status status = Status::pass;
  double worst_margin = 0.0;  // signed; negative means violated
  std::string worst_location;
  std::string note;
};

struct VerdictReport {
  std::string suite;
  std::vector<CheckResult> checks;

  void add(CheckResult c) { checks.push_back(std::move(c)); }
  void merge(const VerdictReport& other);
  bool passed() const;  // inconclusive counts as pass
  std::size_t count(Status s) const;

  // check,pass,worst_margin,worst_location
  std::string csv() const;
  std::string summary() const;
};

// Shared number formatting for every CSV the artifact writes.
std::string fmt_num(double v);

}  // namespace heston
