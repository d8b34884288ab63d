#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace heston {

// CRC-32 of a byte string as eight lowercase hex digits.
std::string checksum_hex(const std::string& bytes);

// Collects the files a command writes into one output directory, so the
// manifest can list each of them with its checksum and size.
class OutputSet {
 public:
  explicit OutputSet(std::string dir);

  // Writes `name` under the output directory and records it.
  void write(const std::string& name, const std::string& contents);

  // Writes manifest.txt: one "file checksum bytes" line per recorded file,
  // sorted by name.
  void write_manifest();

  const std::string& dir() const { return dir_; }
  std::vector<std::string> names() const;

 private:
  struct Entry {
    std::string name, checksum;
    std::size_t bytes;
  };
  std::string dir_;
  std::vector<Entry> entries_;
};

}  // namespace heston
