#pragma once

// Simulated microcontroller. Bytes arrive one at a time; in Classify mode
// the device stays in Read until a full window of float32 samples has
// arrived, runs the integer model once (Process), replies with
// [label, prob_uint8] and returns to Read.
//
// Wire protocol:
//   device -> host  0xA5 once after reset (ready)
//   host -> device  first byte selects the mode: 0x45 'E' echo, 0x43 'C'
//                   classify; anything else is answered with NAK 0x15
//   echo            4 bytes float32 LE in, float32 LE (value + 1) out
//   classify        steps*3 float32 LE values (time-major) in, 2 bytes out

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "fog/error.hpp"
#include "fog/micro/arena.hpp"
#include "fog/quant/packed_model.hpp"

namespace fog::micro {

inline constexpr std::size_t kDefaultFlashBudget = 1'048'576;
inline constexpr std::size_t kDefaultRamBudget = 262'144;
// Flash taken by the firmware image apart from the model blob.
inline constexpr std::size_t kRuntimeFlashBytes = 86'352;
// RAM taken by runtime statics and stack apart from the input buffer.
inline constexpr std::size_t kRuntimeRamBytes = 4'096;

inline constexpr std::uint8_t kReady = 0xA5;
inline constexpr std::uint8_t kModeEcho = 0x45;
inline constexpr std::uint8_t kModeClassify = 0x43;
inline constexpr std::uint8_t kNak = 0x15;

enum class Mode { Unset, Echo, Classify };
enum class State { Read, Process };

struct MemoryReport {
  std::size_t flash_used = 0;
  double flash_pct = 0.0;
  std::size_t ram_high_water = 0;
  double ram_pct = 0.0;
};

class Device {
 public:
  Device(std::span<const std::uint8_t> model_bytes, std::size_t flash_budget = kDefaultFlashBudget,
         std::size_t ram_budget = kDefaultRamBudget)
      : flash_budget_(flash_budget), flash_used_(model_bytes.size() + kRuntimeFlashBytes) {
    if (flash_used_ > flash_budget_) {
      throw Error(Errc::FlashBudgetExceeded, std::to_string(flash_used_) + " bytes > flash budget " +
                                                 std::to_string(flash_budget_));
    }
    try {
      model_ = quant::unpack(model_bytes);
    } catch (const Error& e) {
      throw Error(Errc::BadModel, e.what());
    }
    plan_ = quant::make_plan(model_);
    frame_values_ = model_.input.size();

    arena_ = Arena(ram_budget);
    arena_.reserve_static(kRuntimeRamBytes, "runtime");
    input_offset_ = arena_.allocate(frame_values_ * sizeof(float), alignof(float), "input buffer");
    static_mark_ = arena_.used();
    // Dry-run the inference allocations so an undersized RAM budget fails here
    // rather than mid-stream; the high-water mark is rolled back afterwards.
    Arena probe = arena_;
    allocate_scratch(probe);
  }

  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;
  Device(Device&&) = default;
  Device& operator=(Device&&) = default;

  // Fresh protocol state; returns the ready byte.
  std::vector<std::uint8_t> reset() {
    mode_ = Mode::Unset;
    state_ = State::Read;
    fill_count_ = 0;
    partial_len_ = 0;
    return {kReady};
  }

  std::vector<std::uint8_t> push_byte(std::uint8_t b) {
    switch (mode_) {
      case Mode::Unset:
        if (b == kModeEcho) {
          mode_ = Mode::Echo;
        } else if (b == kModeClassify) {
          mode_ = Mode::Classify;
        } else {
          return {kNak};
        }
        return {};
      case Mode::Echo: {
        float value;
        if (!accumulate(b, value)) return {};
        const float reply = value + 1.0f;
        std::uint8_t out[4];
        std::memcpy(out, &reply, 4);
        return {out, out + 4};
      }
      case Mode::Classify: {
        float value;
        if (!accumulate(b, value)) return {};
        input()[fill_count_++] = value;
        if (fill_count_ < frame_values_) return {};
        state_ = State::Process;
        const auto result = process();
        fill_count_ = 0;
        state_ = State::Read;
        return {result.label, result.prob_uint8};
      }
    }
    return {};
  }

  MemoryReport memory_report() const {
    MemoryReport r;
    r.flash_used = flash_used_;
    r.flash_pct = 100.0 * static_cast<double>(flash_used_) / static_cast<double>(flash_budget_);
    r.ram_high_water = arena_.high_water();
    r.ram_pct = 100.0 * static_cast<double>(arena_.high_water()) / static_cast<double>(arena_.budget());
    return r;
  }

  Mode mode() const { return mode_; }
  State state() const { return state_; }
  std::size_t fill_count() const { return fill_count_; }
  std::size_t frame_values() const { return frame_values_; }
  std::size_t frame_bytes() const { return frame_values_ * sizeof(float); }
  std::size_t inferences() const { return inferences_; }
  std::size_t nonfinite_inputs() const { return nonfinite_inputs_; }
  const quant::PackedModel& model() const { return model_; }

 private:
  struct Scratch {
    std::size_t input, a, b;
  };

  Scratch allocate_scratch(Arena& arena) const {
    Scratch s;
    s.input = arena.allocate(frame_values_, 1, "quantized input");
    s.a = arena.allocate(plan_.max_activation, 1, "activation buffer A");
    s.b = arena.allocate(plan_.max_activation, 1, "activation buffer B");
    return s;
  }

  std::span<float> input() { return arena_.view<float>(input_offset_, frame_values_); }

  // Little-endian float32 assembly; true when a value completes.
  bool accumulate(std::uint8_t b, float& out) {
    partial_[partial_len_++] = b;
    if (partial_len_ < 4) return false;
    partial_len_ = 0;
    std::memcpy(&out, partial_, 4);
    return true;
  }

  quant::QuantizedOutput process() {
    const auto s = allocate_scratch(arena_);
    auto q_in = arena_.view<std::int8_t>(s.input, frame_values_);
    nonfinite_inputs_ += quant::prepare_input(model_, input(), q_in);
    const auto out = quant::quantized_forward(model_, plan_, q_in,
                                              arena_.view<std::int8_t>(s.a, plan_.max_activation),
                                              arena_.view<std::int8_t>(s.b, plan_.max_activation));
    arena_.release_to(static_mark_);
    ++inferences_;
    return out;
  }

  std::size_t flash_budget_;
  std::size_t flash_used_;
  quant::PackedModel model_;
  quant::InferencePlan plan_;
  std::size_t frame_values_ = 0;
  Arena arena_;
  std::size_t input_offset_ = 0;
  std::size_t static_mark_ = 0;

  Mode mode_ = Mode::Unset;
  State state_ = State::Read;
  std::size_t fill_count_ = 0;
  std::uint8_t partial_[4]{};
  std::size_t partial_len_ = 0;
  std::size_t inferences_ = 0;
  std::size_t nonfinite_inputs_ = 0;
};

}  // namespace fog::micro
