#pragma once

namespace crossgan {

/// Bitwise-reproducible execution: every library call runs on the calling
/// thread. The fast mode lets image decoding and resizing use worker threads.
void set_deterministic(bool on);
bool deterministic();

/// Applies CROSSGAN_DETERMINISTIC from the environment ("1", "true", "yes"
/// turn it on; "0", "false", "no" or unset select the fast mode).
bool configure_from_environment();

}  // namespace crossgan
