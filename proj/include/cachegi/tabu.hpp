#pragma once

// Store of compiled artifacts seen so far. A candidate whose artifact is
// byte-identical to a stored one is a duplicate and is never measured.
// Lookups only compare against artifacts of the same length.
//
// With a directory, artifacts are kept on disk as `<size>/<ordinal>.bin`;
// otherwise in memory.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cachegi {

enum class TabuVerdict { fresh, duplicate };

class TabuStore {
 public:
  TabuStore() = default;
  explicit TabuStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(*dir_); }

  TabuVerdict register_artifact(std::string_view bytes) {
    auto& bucket = by_size_[bytes.size()];
    for (std::size_t i = 0; i < bucket.count; ++i) {
      if (load(bytes.size(), i, bucket) == bytes) {
        ++duplicates_;
        return TabuVerdict::duplicate;
      }
    }
    store(bytes, bucket);
    return TabuVerdict::fresh;
  }

  std::uint64_t duplicate_count() const noexcept { return duplicates_; }

  std::size_t stored_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [size, b] : by_size_) n += b.count;
    return n;
  }

  const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

 private:
  struct Bucket {
    std::size_t count = 0;
    std::vector<std::string> memory;
  };

  std::filesystem::path file_for(std::size_t size, std::size_t ordinal) const {
    return *dir_ / std::to_string(size) / (std::to_string(ordinal) + ".bin");
  }

  std::string load(std::size_t size, std::size_t ordinal, const Bucket& bucket) const {
    if (!dir_) return bucket.memory[ordinal];
    std::ifstream in(file_for(size, ordinal), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  void store(std::string_view bytes, Bucket& bucket) {
    if (dir_) {
      const auto path = file_for(bytes.size(), bucket.count);
      std::filesystem::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    } else {
      bucket.memory.emplace_back(bytes);
    }
    ++bucket.count;
  }

  std::optional<std::filesystem::path> dir_;
  std::map<std::size_t, Bucket> by_size_;
  std::uint64_t duplicates_ = 0;
};

}  // namespace cachegi
