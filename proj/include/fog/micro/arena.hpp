#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fog/error.hpp"

namespace fog::micro {

// Bump allocator over a fixed block standing in for device RAM. Handles are
// byte offsets so the owner can be moved freely.
class Arena {
 public:
  explicit Arena(std::size_t budget = 0) : storage_(budget) {}

  std::size_t budget() const { return storage_.size(); }
  std::size_t used() const { return used_; }
  std::size_t high_water() const { return high_water_; }

  // Reserves bytes without backing them, for statically sized runtime state
  // that is accounted but not simulated.
  void reserve_static(std::size_t bytes, const char* what) { allocate(bytes, 1, what); }

  std::size_t allocate(std::size_t bytes, std::size_t align, const char* what) {
    const std::size_t start = (used_ + align - 1) / align * align;
    if (start + bytes > storage_.size()) {
      throw Error(Errc::RamBudgetExceeded,
                  std::string(what) + " needs " + std::to_string(bytes) + " bytes at offset " +
                      std::to_string(start) + ", budget " + std::to_string(storage_.size()));
    }
    used_ = start + bytes;
    if (used_ > high_water_) high_water_ = used_;
    return start;
  }

  template <typename T>
  std::span<T> view(std::size_t offset, std::size_t count) {
    return {reinterpret_cast<T*>(storage_.data() + offset), count};
  }

  // Releases everything allocated after `mark` (a previous used() value).
  void release_to(std::size_t mark) { used_ = mark; }

 private:
  std::vector<std::byte> storage_;
  std::size_t used_ = 0;
  std::size_t high_water_ = 0;
};

}  // namespace fog::micro
