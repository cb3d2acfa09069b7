#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nlverify {

// 64-bit FNV-1a. Any single-byte difference between equal-length inputs is
// guaranteed to change the result (each step is a bijection on the state).
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& m) { log_message(LogLevel::Debug, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::Warn, m); }
inline void log_error(const std::string& m) { log_message(LogLevel::Error, m); }

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Replaces `formal` with `actual` wherever `formal` occurs as a whole
// identifier token in `text`.
std::string substitute_token(std::string_view text, std::string_view formal,
                             std::string_view actual);

// True if `ident` occurs in `text` as a whole identifier token.
bool contains_token(std::string_view text, std::string_view ident);

}  // namespace nlverify
