#include <algorithm>
#include <map>
#include <queue>
#include <tuple>

#include "rss/codec.hpp"

namespace rss {

void BitWriter::write(std::uint64_t value, int bits) {
	if (bits < 0 || bits > 64) {
		throw std::invalid_argument("BitWriter: bit count out of range");
	}
	for (int b = bits - 1; b >= 0; --b) {
		if (bits_ % 8 == 0) {
			bytes_.push_back(0);
		}
		if ((value >> b) & 1U) {
			bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ % 8));
		}
		++bits_;
	}
}

void BitWriter::write_bytes(std::span<const std::uint8_t> bytes) {
	for (const auto b : bytes) {
		write(b, 8);
	}
}

void BitWriter::align() {
	bits_ = bytes_.size() * 8;
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_offset) : bytes_(bytes), pos_(bit_offset) {}

std::uint64_t BitReader::read(int bits) {
	if (bits < 0 || bits > 64) {
		throw std::invalid_argument("BitReader: bit count out of range");
	}
	if (static_cast<std::size_t>(bits) > remaining()) {
		throw DecodeError("truncated bitstream");
	}
	std::uint64_t v = 0;
	for (int b = 0; b < bits; ++b) {
		const std::uint8_t byte = bytes_[pos_ / 8];
		v = (v << 1) | ((byte >> (7 - pos_ % 8)) & 1U);
		++pos_;
	}
	return v;
}

namespace {

std::vector<int> huffman_lengths(const std::vector<std::uint64_t>& freq) {
	const std::size_t n = freq.size();
	// (weight, id); leaves take ids 0..n-1 in symbol order, merges follow.
	using Node = std::pair<std::uint64_t, std::size_t>;
	std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
	std::vector<std::size_t> parent(2 * n, 0);
	for (std::size_t i = 0; i < n; ++i) {
		heap.emplace(freq[i], i);
	}
	std::size_t next = n;
	while (heap.size() > 1) {
		const Node a = heap.top();
		heap.pop();
		const Node b = heap.top();
		heap.pop();
		parent[a.second] = next;
		parent[b.second] = next;
		heap.emplace(a.first + b.first, next);
		++next;
	}
	const std::size_t root = next - 1;
	std::vector<int> depth(next, 0);
	for (std::size_t id = root; id-- > 0;) {
		depth[id] = depth[parent[id]] + 1;
	}
	return {depth.begin(), depth.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

HuffmanCode HuffmanCode::build(std::span<const std::int32_t> symbols) {
	std::map<std::int32_t, std::uint64_t> counts;
	for (const auto s : symbols) {
		++counts[s];
	}
	std::vector<std::pair<std::int32_t, int>> lengths;
	if (counts.size() == 1) {
		lengths.emplace_back(counts.begin()->first, 1);
	} else if (counts.size() > 1) {
		std::vector<std::uint64_t> freq;
		for (const auto& [sym, c] : counts) {
			freq.push_back(c);
		}
		std::vector<int> len = huffman_lengths(freq);
		while (*std::max_element(len.begin(), len.end()) > kMaxLength) {
			for (auto& f : freq) {
				f = (f + 1) / 2;
			}
			len = huffman_lengths(freq);
		}
		std::size_t i = 0;
		for (const auto& [sym, c] : counts) {
			lengths.emplace_back(sym, len[i++]);
		}
	}
	return from_lengths(std::move(lengths));
}

HuffmanCode HuffmanCode::from_lengths(std::vector<std::pair<std::int32_t, int>> lengths) {
	HuffmanCode code;
	std::uint64_t kraft = 0;
	for (const auto& [sym, len] : lengths) {
		if (len < 1 || len > kMaxLength) {
			throw DecodeError("Huffman code length out of range");
		}
		kraft += std::uint64_t{1} << (kMaxLength - len);
		code.entries_.push_back(Entry{sym, len, 0});
	}
	if (kraft > (std::uint64_t{1} << kMaxLength)) {
		throw DecodeError("Huffman code lengths violate the Kraft inequality");
	}
	std::sort(code.entries_.begin(), code.entries_.end(), [](const Entry& a, const Entry& b) {
		return std::tie(a.length, a.symbol) < std::tie(b.length, b.symbol);
	});
	code.assign_codes();
	code.by_symbol_ = code.entries_;
	std::sort(code.by_symbol_.begin(), code.by_symbol_.end(),
	          [](const Entry& a, const Entry& b) { return a.symbol < b.symbol; });
	for (std::size_t i = 1; i < code.by_symbol_.size(); ++i) {
		if (code.by_symbol_[i].symbol == code.by_symbol_[i - 1].symbol) {
			throw DecodeError("duplicate symbol in Huffman table");
		}
	}
	return code;
}

void HuffmanCode::assign_codes() {
	count_.assign(kMaxLength + 1, 0);
	for (const auto& e : entries_) {
		++count_[static_cast<std::size_t>(e.length)];
	}
	first_code_.assign(kMaxLength + 1, 0);
	first_index_.assign(kMaxLength + 1, 0);
	std::uint64_t code = 0;
	std::size_t index = 0;
	for (int len = 1; len <= kMaxLength; ++len) {
		first_code_[static_cast<std::size_t>(len)] = static_cast<std::uint32_t>(code);
		first_index_[static_cast<std::size_t>(len)] = index;
		code = (code + count_[static_cast<std::size_t>(len)]) << 1;
		index += count_[static_cast<std::size_t>(len)];
	}
	std::size_t i = 0;
	for (int len = 1; len <= kMaxLength; ++len) {
		for (std::size_t j = 0; j < count_[static_cast<std::size_t>(len)]; ++j, ++i) {
			entries_[i].code = first_code_[static_cast<std::size_t>(len)] + static_cast<std::uint32_t>(j);
		}
	}
}

const HuffmanCode::Entry& HuffmanCode::find(std::int32_t symbol) const {
	const auto it = std::lower_bound(by_symbol_.begin(), by_symbol_.end(), symbol,
	                                 [](const Entry& e, std::int32_t s) { return e.symbol < s; });
	if (it == by_symbol_.end() || it->symbol != symbol) {
		throw std::invalid_argument("symbol not in Huffman table");
	}
	return *it;
}

int HuffmanCode::length(std::int32_t symbol) const {
	return find(symbol).length;
}

void HuffmanCode::encode(BitWriter& out, std::int32_t symbol) const {
	const Entry& e = find(symbol);
	out.write(e.code, e.length);
}

std::int32_t HuffmanCode::decode(BitReader& in) const {
	if (entries_.empty()) {
		throw DecodeError("empty Huffman table");
	}
	std::uint64_t code = 0;
	for (int len = 1; len <= kMaxLength; ++len) {
		code = (code << 1) | (in.read_bit() ? 1U : 0U);
		const auto l = static_cast<std::size_t>(len);
		const std::uint64_t first = first_code_[l];
		if (code >= first && code - first < count_[l]) {
			return entries_[first_index_[l] + static_cast<std::size_t>(code - first)].symbol;
		}
	}
	throw DecodeError("invalid Huffman code");
}

}  // namespace rss
