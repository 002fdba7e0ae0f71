#ifndef UMC_SUBPROCESS_HPP
#define UMC_SUBPROCESS_HPP

#include <cerrno>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "umc/common.hpp"

namespace umc {

/// Run a program, feed `input` on stdin, collect stdout. Throws
/// subprocess_failure on spawn failure or nonzero exit.
inline std::vector<std::uint8_t> run_subprocess(const std::vector<std::string>& argv,
                                                const std::vector<std::uint8_t>& input) {
    if (argv.empty()) throw subprocess_failure("empty argv");
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw subprocess_failure("pipe() failed");

    const pid_t pid = fork();
    if (pid < 0) throw subprocess_failure("fork() failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }

    close(in_pipe[0]);
    close(out_pipe[1]);

    // Writer runs on its own thread so a child that interleaves reading and
    // writing cannot deadlock against us.
    std::thread writer([&, fd = in_pipe[1]] {
        signal(SIGPIPE, SIG_IGN);
        std::size_t off = 0;
        while (off < input.size()) {
            const ssize_t k = write(fd, input.data() + off, input.size() - off);
            if (k <= 0) break;  // child closed early; reader reports the failure
            off += static_cast<std::size_t>(k);
        }
        close(fd);
    });

    std::vector<std::uint8_t> output;
    std::uint8_t buf[1 << 16];
    for (;;) {
        const ssize_t k = read(out_pipe[0], buf, sizeof(buf));
        if (k < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (k == 0) break;
        output.insert(output.end(), buf, buf + k);
    }
    close(out_pipe[0]);
    writer.join();

    int status = 0;
    if (waitpid(pid, &status, 0) < 0)
        throw subprocess_failure("waitpid() failed");
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw subprocess_failure("'" + argv[0] + "' exited with status " +
                                 std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
    return output;
}

}  // namespace umc

#endif  // UMC_SUBPROCESS_HPP
