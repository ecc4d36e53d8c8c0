#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace codemix::utf8 {

// Decode to code points. Invalid bytes are kept as single code points so that
// feature extraction stays total on arbitrary input.
std::vector<std::uint32_t> decode(std::string_view s);

std::string encode(const std::vector<std::uint32_t>& cps);
std::string encode_one(std::uint32_t cp);

std::size_t length(std::string_view s);

// Last (at most) n code points; whole string if shorter.
std::string suffix(std::string_view s, std::size_t n);
std::string prefix(std::string_view s, std::size_t n);

} // namespace codemix::utf8
