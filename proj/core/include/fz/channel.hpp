#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fz/error.hpp"

namespace fz::wire {

/// Ordered reliable byte stream. `read` blocks until at least one byte
/// is available or the peer has closed (then returns 0).
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void write(std::span<const uint8_t> bytes) = 0;
  virtual size_t read(std::span<uint8_t> out) = 0;
  virtual void close_write() = 0;
};

// Fills `out` completely; throws channel_closed on EOF (even mid-read).
void read_exact(Channel& channel, std::span<uint8_t> out);

// In-process pipe: first element writes, second reads.
std::pair<std::shared_ptr<Channel>, std::shared_ptr<Channel>> memory_pipe();

std::shared_ptr<Channel> open_file_writer(const std::string& path);
std::shared_ptr<Channel> open_file_reader(const std::string& path);

// Loopback/TCP endpoints; `address` is host:port. The listener blocks
// until one peer connects.
std::shared_ptr<Channel> tcp_listen(const std::string& address);
std::shared_ptr<Channel> tcp_connect(const std::string& address);

}  // namespace fz::wire
