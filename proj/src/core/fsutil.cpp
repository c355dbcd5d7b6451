#include "protobooth/fsutil.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>

#include "protobooth/error.hpp"

namespace fs = std::filesystem;

namespace protobooth {

namespace {

[[noreturn]] void storage_failure(const std::string& what, const fs::path& p) {
  throw Error(ErrorCode::kStorage,
              what + " " + p.string() + ": " + std::strerror(errno));
}

}  // namespace

fs::path temp_sibling(const fs::path& target) {
  static std::atomic<std::uint64_t> counter{0};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  return target.parent_path() /
         (".tmp-" + std::to_string(rng()) + "-" + std::to_string(++counter));
}

void write_file_atomic(const fs::path& path,
                       std::span<const unsigned char> data) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = temp_sibling(path);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) storage_failure("cannot create", tmp);
  std::size_t written = 0;
  while (written < data.size()) {
    ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      ::unlink(tmp.c_str());
      storage_failure("cannot write", tmp);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    storage_failure("cannot sync", tmp);
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    ::unlink(tmp.c_str());
    storage_failure("cannot rename into", path);
  }
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  write_file_atomic(path,
                    std::span<const unsigned char>(
                        reinterpret_cast<const unsigned char*>(text.data()),
                        text.size()));
}

std::optional<Bytes> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void sync_directory(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

}  // namespace protobooth
