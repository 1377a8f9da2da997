#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <string>

#include "layoutforge/errors.hpp"

namespace layoutforge {

struct ProgressEvent {
  std::string stage;
  std::size_t stage_index = 0;
  std::size_t evaluations = 0;  // cumulative over the whole run
  double best = 0.0;            // best penalized objective of the current stage
};

struct RunHooks {
  std::function<void(const ProgressEvent&)> on_progress;
  const std::atomic<bool>* cancel = nullptr;

  void report(const ProgressEvent& e) const {
    if (on_progress) on_progress(e);
  }
  void check_cancel() const {
    if (cancel && cancel->load()) throw Cancelled();
  }
};

}  // namespace layoutforge
