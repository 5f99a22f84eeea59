// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_TESTS_SUPPORT_HPP
#define FEDDP_TESTS_SUPPORT_HPP

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "feddp/dataset.hpp"
#include "feddp/error.hpp"
#include "feddp/rng.hpp"

namespace support {

// Runs `stmt` and checks that it throws feddp::Error of the given kind.
#define EXPECT_FEDDP_ERROR(stmt, expected_kind)                        \
  do {                                                                 \
    try {                                                              \
      stmt;                                                            \
      ADD_FAILURE() << "no exception from " #stmt;                     \
    } catch (const feddp::Error& e) {                                  \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                  \
    }                                                                  \
  } while (0)

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("feddp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> random_vector(feddp::Rng& rng, std::size_t d, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(d);
  for (auto& x : v) {
    x = lo + (hi - lo) * rng.uniform01();
  }
  return v;
}

// Two noisy clusters; defective rows sit around `shift` in every feature.
inline feddp::ProjectDataset toy_dataset(feddp::Rng& rng, std::size_t n, std::size_t d, std::size_t defects,
                                         const std::string& project = "toy", const std::string& version = "1",
                                         double shift = 0.6) {
  std::vector<feddp::Instance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i < defects ? 1 : 0;
    auto f = random_vector(rng, d, 0.0, 0.5);
    if (y == 1) {
      for (auto& x : f) x += shift;
    }
    rows.push_back({std::move(f), y});
  }
  return {project, version, std::move(rows)};
}

}  // namespace support

#endif  // FEDDP_TESTS_SUPPORT_HPP
