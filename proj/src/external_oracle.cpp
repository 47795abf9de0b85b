#include "returnldp/borel.hpp"

#include "returnldp/error.hpp"

#include <csignal>
#include <cstring>
#include <sys/wait.h>
#include <unistd.h>

namespace returnldp {

namespace {

void write_all(int fd, const std::string& s) {
  std::size_t done = 0;
  while (done < s.size()) {
    const ssize_t n = ::write(fd, s.data() + done, s.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::OracleProtocol, std::string("cannot write to oracle process: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

ExternalOracle::ExternalOracle(std::string command, int alphabet_size)
    : command_(std::move(command)), alphabet_size_(alphabet_size) {
  if (alphabet_size_ < 2 || alphabet_size_ > max_alphabet_size) {
    throw Error(ErrorKind::InvalidArgument, "external oracle alphabet size out of range");
  }
  int down[2], up[2];
  if (::pipe(down) != 0) throw Error(ErrorKind::OracleProtocol, "pipe() failed");
  if (::pipe(up) != 0) {
    ::close(down[0]);
    ::close(down[1]);
    throw Error(ErrorKind::OracleProtocol, "pipe() failed");
  }
  std::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorKind::OracleProtocol, "fork() failed");
  if (pid == 0) {
    ::dup2(down[0], STDIN_FILENO);
    ::dup2(up[1], STDOUT_FILENO);
    ::close(down[0]);
    ::close(down[1]);
    ::close(up[0]);
    ::close(up[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(down[0]);
  ::close(up[1]);
  pid_ = pid;
  to_child_ = down[1];
  from_child_ = up[0];
}

ExternalOracle::~ExternalOracle() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

Placement ExternalOracle::classify(const Word& w) const {
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(w); it != cache_.end()) return it->second;
  for (Symbol s : w.symbols()) {
    if (s >= alphabet_size_) throw Error(ErrorKind::InvalidArgument, "word symbol outside the oracle alphabet");
  }
  write_all(to_child_, "CLASSIFY " + w.str() + "\n");

  std::size_t nl;
  while ((nl = pending_.find('\n')) == std::string::npos) {
    char buf[256];
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorKind::OracleProtocol, "oracle process closed its output");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
  std::string line = pending_.substr(0, nl);
  pending_.erase(0, nl + 1);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();

  Placement p;
  if (line == "IN") {
    p = Placement::inside;
  } else if (line == "OUT") {
    p = Placement::outside;
  } else if (line == "STRADDLE") {
    p = Placement::straddles;
  } else {
    throw Error(ErrorKind::OracleProtocol, "unexpected oracle response '" + line + "' for word '" + w.str() + "'");
  }
  cache_.emplace(w, p);
  return p;
}

}  // namespace returnldp
