#include "fz/channel.hpp"

#include <condition_variable>
#include <cstdio>
#include <cstring>
#include <deque>
#include <mutex>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace fz::wire {

void read_exact(Channel& channel, std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    size_t got = channel.read(out.subspan(done));
    if (got == 0)
      raise(errc::channel_closed, "channel closed after " +
                                      std::to_string(done) + " of " +
                                      std::to_string(out.size()) + " bytes");
    done += got;
  }
}

namespace {

struct PipeState {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<uint8_t> buf;
  bool closed = false;
};

class PipeWriter : public Channel {
 public:
  explicit PipeWriter(std::shared_ptr<PipeState> s) : s_(std::move(s)) {}
  ~PipeWriter() override { close_write(); }

  void write(std::span<const uint8_t> bytes) override {
    std::lock_guard lock(s_->mu);
    if (s_->closed) raise(errc::channel_closed, "pipe already closed");
    s_->buf.insert(s_->buf.end(), bytes.begin(), bytes.end());
    s_->cv.notify_all();
  }
  size_t read(std::span<uint8_t>) override {
    raise(errc::io_error, "write end of pipe is not readable");
  }
  void close_write() override {
    std::lock_guard lock(s_->mu);
    s_->closed = true;
    s_->cv.notify_all();
  }

 private:
  std::shared_ptr<PipeState> s_;
};

class PipeReader : public Channel {
 public:
  explicit PipeReader(std::shared_ptr<PipeState> s) : s_(std::move(s)) {}

  void write(std::span<const uint8_t>) override {
    raise(errc::io_error, "read end of pipe is not writable");
  }
  size_t read(std::span<uint8_t> out) override {
    std::unique_lock lock(s_->mu);
    s_->cv.wait(lock, [&] { return !s_->buf.empty() || s_->closed; });
    size_t n = std::min(out.size(), s_->buf.size());
    for (size_t i = 0; i < n; ++i) {
      out[i] = s_->buf.front();
      s_->buf.pop_front();
    }
    return n;
  }
  void close_write() override {}

 private:
  std::shared_ptr<PipeState> s_;
};

class FileChannel : public Channel {
 public:
  FileChannel(const std::string& path, bool writing) : writing_(writing) {
    f_ = std::fopen(path.c_str(), writing ? "wb" : "rb");
    if (!f_) raise(errc::io_error, "cannot open '" + path + "'");
  }
  ~FileChannel() override {
    if (f_) std::fclose(f_);
  }

  void write(std::span<const uint8_t> bytes) override {
    if (!writing_) raise(errc::io_error, "file opened read-only");
    if (std::fwrite(bytes.data(), 1, bytes.size(), f_) != bytes.size())
      raise(errc::io_error, "short write");
  }
  size_t read(std::span<uint8_t> out) override {
    if (writing_) raise(errc::io_error, "file opened write-only");
    return std::fread(out.data(), 1, out.size(), f_);
  }
  void close_write() override {
    if (f_) {
      std::fclose(f_);
      f_ = nullptr;
    }
  }

 private:
  std::FILE* f_ = nullptr;
  bool writing_;
};

class SocketChannel : public Channel {
 public:
  explicit SocketChannel(int fd) : fd_(fd) {}
  ~SocketChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void write(std::span<const uint8_t> bytes) override {
    size_t done = 0;
    while (done < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, 0);
      if (n <= 0) raise(errc::channel_closed, "socket send failed");
      done += size_t(n);
    }
  }
  size_t read(std::span<uint8_t> out) override {
    ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
    if (n < 0) raise(errc::channel_closed, "socket recv failed");
    return size_t(n);
  }
  void close_write() override { ::shutdown(fd_, SHUT_WR); }

 private:
  int fd_;
};

sockaddr_in parse_address(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos)
    raise(errc::parse_error, "address must be host:port");
  std::string host = address.substr(0, colon);
  int port = std::atoi(address.c_str() + colon + 1);
  if (port <= 0 || port > 65535) raise(errc::parse_error, "bad port");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(uint16_t(port));
  if (host.empty() || host == "*") host = "0.0.0.0";
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    raise(errc::parse_error, "bad IPv4 host '" + host + "'");
  return addr;
}

}  // namespace

std::pair<std::shared_ptr<Channel>, std::shared_ptr<Channel>> memory_pipe() {
  auto state = std::make_shared<PipeState>();
  return {std::make_shared<PipeWriter>(state),
          std::make_shared<PipeReader>(state)};
}

std::shared_ptr<Channel> open_file_writer(const std::string& path) {
  return std::make_shared<FileChannel>(path, true);
}

std::shared_ptr<Channel> open_file_reader(const std::string& path) {
  return std::make_shared<FileChannel>(path, false);
}

std::shared_ptr<Channel> tcp_listen(const std::string& address) {
  sockaddr_in addr = parse_address(address);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) raise(errc::io_error, "socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  timeval accept_timeout{10, 0};  // a peer that never shows up is an error
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &accept_timeout,
               sizeof accept_timeout);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    raise(errc::io_error, "bind failed on " + address);
  }
  if (::listen(fd, 1) != 0) {
    ::close(fd);
    raise(errc::io_error, "listen failed");
  }
  int peer = ::accept(fd, nullptr, nullptr);
  ::close(fd);
  if (peer < 0) raise(errc::io_error, "accept failed or timed out");
  return std::make_shared<SocketChannel>(peer);
}

std::shared_ptr<Channel> tcp_connect(const std::string& address) {
  sockaddr_in addr = parse_address(address);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) raise(errc::io_error, "socket() failed");
  for (int attempt = 0;; ++attempt) {
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0)
      break;
    if (attempt >= 50) {
      ::close(fd);
      raise(errc::io_error, "connect failed to " + address);
    }
    ::usleep(20 * 1000);  // listener may not be up yet
  }
  return std::make_shared<SocketChannel>(fd);
}

}  // namespace fz::wire
