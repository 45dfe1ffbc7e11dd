#pragma once

#include <string>

#include "crestcap/signal.hpp"

namespace crestcap {

enum class WavDepth { pcm16, pcm24, float32 };

/// Read a RIFF/WAVE file (PCM 16/24-bit or IEEE float32, mono or
/// multichannel). Multichannel input is downmixed to mono by averaging the
/// channels. Integer samples are scaled by 1/2^(bits-1) so full scale maps
/// to [-1, 1]. Throws on unreadable files and unsupported encodings.
Signal load_wav(const std::string& path);

/// Write a mono WAV at the requested depth. Integer depths reject samples
/// with |x| > 1 instead of clipping them silently.
void save_wav(const Signal& x, const std::string& path, WavDepth depth = WavDepth::float32);

}  // namespace crestcap
