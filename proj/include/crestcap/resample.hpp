#pragma once

#include "crestcap/signal.hpp"

namespace crestcap {

/// Band-limited sample rate conversion. Windowed-sinc polyphase with a
/// Kaiser prototype: passband up to 0.40 x the lower of the two rates,
/// stopband (>= 60 dB rejection) from 0.45 x the lower rate. Output length
/// is round(N * target/source).
Signal resample(const Signal& x, double target_rate_hz);

}  // namespace crestcap
