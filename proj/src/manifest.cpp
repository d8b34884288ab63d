#include "heston/manifest.hpp"

#include <algorithm>
#include <boost/crc.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace heston {

std::string checksum_hex(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
  return buf;
}

OutputSet::OutputSet(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void OutputSet::write(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::path(dir_) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
  Entry e{name, checksum_hex(contents), contents.size()};
  if (it == entries_.end()) entries_.push_back(e);
  else *it = e;
}

void OutputSet::write_manifest() {
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
  std::ostringstream os;
  for (const auto& e : sorted) os << e.name << ' ' << e.checksum << ' ' << e.bytes << '\n';
  const auto path = std::filesystem::path(dir_) / "manifest.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << os.str();
}

std::vector<std::string> OutputSet::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

}  // namespace heston
