#include "crossgan/runtime.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include <opencv2/core/utility.hpp>

#include "crossgan/error.hpp"

namespace crossgan {
namespace {

std::atomic<bool> g_deterministic{false};

}  // namespace

void set_deterministic(bool on) {
  g_deterministic = on;
  cv::setNumThreads(on ? 0 : -1);
}

bool deterministic() { return g_deterministic; }

bool configure_from_environment() {
  const char* raw = std::getenv("CROSSGAN_DETERMINISTIC");
  if (raw == nullptr) {
    set_deterministic(false);
    return false;
  }
  const std::string v(raw);
  if (v == "1" || v == "true" || v == "yes" || v.empty()) {
    set_deterministic(true);
  } else if (v == "0" || v == "false" || v == "no") {
    set_deterministic(false);
  } else {
    throw ConfigError("CROSSGAN_DETERMINISTIC must be 0 or 1, got '" + v + "'");
  }
  return deterministic();
}

}  // namespace crossgan
