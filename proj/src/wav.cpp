#include "rss/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>

namespace rss {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
	return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
	return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
	       (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
	out.push_back(static_cast<std::uint8_t>(v & 0xFF));
	out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
	for (int i = 0; i < 4; ++i) {
		out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
	}
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
	out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Signal load_wav(const std::filesystem::path& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw WavError("cannot open " + path.string());
	}
	const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
	if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
		throw WavError(path.string() + ": not a RIFF/WAVE file");
	}

	std::uint16_t format = 0, channels = 0, bits = 0;
	std::uint32_t rate = 0;
	bool have_fmt = false;
	const std::uint8_t* data = nullptr;
	std::size_t data_size = 0;

	std::size_t pos = 12;
	while (pos + 8 <= bytes.size()) {
		const std::uint8_t* chunk = bytes.data() + pos;
		const std::uint32_t size = read_u32(chunk + 4);
		const std::size_t body = pos + 8;
		const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);
		if (std::memcmp(chunk, "fmt ", 4) == 0) {
			if (available < 16) {
				throw WavError(path.string() + ": truncated fmt chunk");
			}
			format = read_u16(bytes.data() + body);
			channels = read_u16(bytes.data() + body + 2);
			rate = read_u32(bytes.data() + body + 4);
			bits = read_u16(bytes.data() + body + 14);
			if (format == kFormatExtensible) {
				if (available < 26) {
					throw WavError(path.string() + ": truncated extensible fmt chunk");
				}
				format = read_u16(bytes.data() + body + 24);
			}
			have_fmt = true;
		} else if (std::memcmp(chunk, "data", 4) == 0) {
			data = bytes.data() + body;
			data_size = available;
		}
		pos = body + size + (size & 1u);
	}

	if (!have_fmt || data == nullptr) {
		throw WavError(path.string() + ": missing fmt or data chunk");
	}
	if (channels == 0 || rate == 0) {
		throw WavError(path.string() + ": invalid channel count or sample rate");
	}
	const bool pcm16 = format == kFormatPcm && bits == 16;
	const bool float32 = format == kFormatFloat && bits == 32;
	if (!pcm16 && !float32) {
		throw WavError(path.string() + ": unsupported encoding (format " + std::to_string(format) + ", " +
		               std::to_string(bits) + " bits); only PCM16 and float32 are read");
	}
	if (channels > 1) {
		std::cerr << "warning: " << path.string() << " has " << channels << " channels, keeping channel 0\n";
	}

	const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
	const std::size_t frames = data_size / frame_bytes;
	if (frames == 0) {
		throw WavError(path.string() + ": no audio frames");
	}
	std::vector<double> samples(frames);
	for (std::size_t i = 0; i < frames; ++i) {
		const std::uint8_t* p = data + i * frame_bytes;
		if (pcm16) {
			const auto v = static_cast<std::int16_t>(read_u16(p));
			samples[i] = static_cast<double>(v) / 32768.0;
		} else {
			samples[i] = static_cast<double>(std::bit_cast<float>(read_u32(p)));
		}
	}
	return Signal(std::move(samples), static_cast<int>(rate));
}

void save_wav(const std::filesystem::path& path, const Signal& signal, WavEncoding encoding) {
	const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
	const std::uint16_t format = encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat;
	const auto rate = static_cast<std::uint32_t>(signal.sample_rate());
	const auto data_size = static_cast<std::uint32_t>(signal.length() * (bits / 8));

	std::vector<std::uint8_t> out;
	out.reserve(44 + data_size);
	put_tag(out, "RIFF");
	put_u32(out, 36 + data_size);
	put_tag(out, "WAVE");
	put_tag(out, "fmt ");
	put_u32(out, 16);
	put_u16(out, format);
	put_u16(out, 1);
	put_u32(out, rate);
	put_u32(out, rate * (bits / 8));
	put_u16(out, static_cast<std::uint16_t>(bits / 8));
	put_u16(out, bits);
	put_tag(out, "data");
	put_u32(out, data_size);
	for (double x : signal.samples()) {
		if (encoding == WavEncoding::Pcm16) {
			const double scaled = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
			put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
		} else {
			put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
		}
	}

	std::ofstream file(path, std::ios::binary);
	if (!file) {
		throw WavError("cannot write " + path.string());
	}
	file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace rss
