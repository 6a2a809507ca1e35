#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chartkit::text {

constexpr std::string_view kWhitespace = " \t\n\r\f\v";

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool is_blank(std::string_view s);

// Decodes UTF-8 into code points. Invalid bytes decode to themselves so that
// arbitrary input never throws and distinct byte strings stay distinct.
std::vector<char32_t> decode_utf8(std::string_view s);

std::size_t count_whitespace_tokens(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

// Number of non-overlapping occurrences of needle in haystack.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// 64-bit FNV-1a, used for stable content addressing (prompt hashes, run ids).
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace chartkit::text
