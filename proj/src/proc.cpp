// SPDX-License-Identifier: Apache-2.0
#include "verisure/proc.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

namespace verisure {

namespace {

bool is_executable_file(const std::string& path) {
    struct stat st{};
    if (::stat(path.c_str(), &st) != 0) return false;
    if (!S_ISREG(st.st_mode)) return false;
    return ::access(path.c_str(), X_OK) == 0;
}

std::string resolve_command(const std::string& name) {
    if (name.find('/') != std::string::npos) {
        return is_executable_file(name) ? name : std::string();
    }
    const char* path_env = std::getenv("PATH");
    if (!path_env) return {};
    std::string path(path_env);
    size_t pos = 0;
    while (pos <= path.size()) {
        size_t colon = path.find(':', pos);
        if (colon == std::string::npos) colon = path.size();
        std::string dir = path.substr(pos, colon - pos);
        if (dir.empty()) dir = ".";
        std::string candidate = dir + "/" + name;
        if (is_executable_file(candidate)) return candidate;
        pos = colon + 1;
    }
    return {};
}

} // namespace

bool command_exists(const std::string& name) { return !resolve_command(name).empty(); }

Result<ProcResult> run_process(const std::vector<std::string>& argv, const std::string& cwd,
                               int timeout_seconds) {
    if (argv.empty()) return make_error("ToolMissing", "empty command line");
    std::string exe = resolve_command(argv[0]);
    if (exe.empty()) {
        return make_error("ToolMissing", "executable not found: " + argv[0], argv[0]);
    }

    int fds[2];
    if (::pipe(fds) != 0) {
        return make_error("ProcError", std::string("pipe failed: ") + std::strerror(errno));
    }

    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        return make_error("ProcError", std::string("fork failed: ") + std::strerror(errno));
    }

    if (pid == 0) {
        ::close(fds[0]);
        ::dup2(fds[1], STDOUT_FILENO);
        ::dup2(fds[1], STDERR_FILENO);
        ::close(fds[1]);
        if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) _exit(126);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        cargv.push_back(const_cast<char*>(exe.c_str()));
        for (size_t i = 1; i < argv.size(); ++i) cargv.push_back(const_cast<char*>(argv[i].c_str()));
        cargv.push_back(nullptr);
        ::execv(exe.c_str(), cargv.data());
        _exit(127);
    }

    ::close(fds[1]);
    ProcResult result;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
    char buf[4096];
    bool open = true;
    while (open) {
        auto now = std::chrono::steady_clock::now();
        long remaining_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        if (remaining_ms <= 0) {
            result.timed_out = true;
            ::kill(pid, SIGKILL);
            remaining_ms = 1000; // drain whatever the dying child flushed
        }
        struct pollfd pfd{fds[0], POLLIN, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(remaining_ms > 1000 ? 1000 : remaining_ms));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            if (result.timed_out) break; // grandchildren may pin the pipe open
            continue;
        }
        ssize_t n = ::read(fds[0], buf, sizeof(buf));
        if (n > 0) {
            result.output.append(buf, static_cast<size_t>(n));
        } else {
            open = false;
        }
        if (result.timed_out && n <= 0) break;
    }
    ::close(fds[0]);

    int status = 0;
    ::waitpid(pid, &status, 0);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    } else {
        result.exit_code = -1;
    }
    return result;
}

} // namespace verisure
