#ifndef MINPAIR_TESTS_TEST_UTIL_HPP_
#define MINPAIR_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "minpair/resources.hpp"

namespace minpair::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(MINPAIR_FIXTURES) / name;
}

inline const RuleResources& default_resources() {
  static const RuleResources res = RuleResources::load(MINPAIR_DEFAULT_RESOURCES);
  return res;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("minpair-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

  std::filesystem::path write(const std::string& name,
                              const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace minpair::testing

#endif  // MINPAIR_TESTS_TEST_UTIL_HPP_
