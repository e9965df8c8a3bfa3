#include "nbharness/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "nbharness/error.hpp"

namespace nbharness {

namespace {

struct Pipe {
    int fd[2] = {-1, -1};
    Pipe() {
        if (pipe2(fd, O_CLOEXEC) != 0) {
            throw Error(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
        }
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fd[0] >= 0) {
            ::close(fd[0]);
            fd[0] = -1;
        }
    }
    void close_write() {
        if (fd[1] >= 0) {
            ::close(fd[1]);
            fd[1] = -1;
        }
    }
};

void set_nonblocking(int fd) {
    const int flags = fcntl(fd, F_GETFL, 0);
    if (flags != -1) {
        (void)fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    }
}

// Returns false at EOF or on a hard error.
bool drain(int fd, std::string& out) {
    char buf[8192];
    while (true) {
        const ssize_t n = ::read(fd, buf, sizeof(buf));
        if (n > 0) {
            out.append(buf, static_cast<std::size_t>(n));
            continue;
        }
        if (n == 0) {
            return false;
        }
        return errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR;
    }
}

}  // namespace

std::string find_on_path(std::string_view name) {
    if (name.find('/') != std::string_view::npos) {
        return ::access(std::string(name).c_str(), X_OK) == 0 ? std::string(name) : std::string();
    }
    const char* path = std::getenv("PATH");
    if (path == nullptr) {
        return {};
    }
    std::string_view rest(path);
    while (!rest.empty()) {
        const auto colon = rest.find(':');
        const auto dir = rest.substr(0, colon);
        if (!dir.empty()) {
            const auto candidate = (std::filesystem::path(dir) / name).string();
            if (::access(candidate.c_str(), X_OK) == 0) {
                return candidate;
            }
        }
        if (colon == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(colon + 1);
    }
    return {};
}

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          std::chrono::milliseconds timeout) {
    if (argv.empty()) {
        throw Error(ErrorCode::InvalidArgs, "run_process: empty argv");
    }
    Pipe in, out, err;
    std::vector<char*> cargv;
    for (const auto& a : argv) {
        cargv.push_back(const_cast<char*>(a.c_str()));
    }
    cargv.push_back(nullptr);

    const pid_t pid = fork();
    if (pid < 0) {
        throw Error(ErrorCode::Io, std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(in.fd[0], STDIN_FILENO);
        dup2(out.fd[1], STDOUT_FILENO);
        dup2(err.fd[1], STDERR_FILENO);
        execvp(cargv[0], cargv.data());
        const char msg[] = "exec failed\n";
        (void)!::write(STDERR_FILENO, msg, sizeof(msg) - 1);
        _exit(127);
    }
    setpgid(pid, pid);
    in.close_read();
    out.close_write();
    err.close_write();
    set_nonblocking(in.fd[1]);
    set_nonblocking(out.fd[0]);
    set_nonblocking(err.fd[0]);

    // A child that exits before reading its input must not kill us with SIGPIPE.
    static const bool sigpipe_ignored = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;

    ProcessResult result;
    std::size_t written = 0;
    if (input.empty()) {
        in.close_write();
    }
    bool out_open = true;
    bool err_open = true;
    const auto deadline = std::chrono::steady_clock::now() + timeout;

    while (out_open || err_open) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
            break;
        }
        std::vector<pollfd> fds;
        if (in.fd[1] >= 0) {
            fds.push_back({in.fd[1], POLLOUT, 0});
        }
        if (out_open) {
            fds.push_back({out.fd[0], POLLIN, 0});
        }
        if (err_open) {
            fds.push_back({err.fd[0], POLLIN, 0});
        }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        const int rc = poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(remaining, 100)));
        if (rc < 0 && errno != EINTR) {
            break;
        }
        for (const auto& p : fds) {
            if (p.revents == 0) {
                continue;
            }
            if (p.fd == in.fd[1]) {
                if (p.revents & (POLLERR | POLLHUP)) {
                    in.close_write();
                    continue;
                }
                const ssize_t n = ::write(in.fd[1], input.data() + written, input.size() - written);
                if (n > 0) {
                    written += static_cast<std::size_t>(n);
                } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
                    in.close_write();
                }
                if (written >= input.size()) {
                    in.close_write();
                }
            } else if (p.fd == out.fd[0]) {
                out_open = drain(out.fd[0], result.out);
            } else if (p.fd == err.fd[0]) {
                err_open = drain(err.fd[0], result.err);
            }
        }
    }
    in.close_write();

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    // Reap anything the child left behind in its group.
    kill(-pid, SIGKILL);

    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.term_signal = WTERMSIG(status);
    }
    return result;
}

}  // namespace nbharness
