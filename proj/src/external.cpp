#include "cpsconf/robustness.hpp"
#include "cpsconf/systems.hpp"
#include "cpsconf/trace_io.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace cpsconf {

namespace {

void write_request(const std::filesystem::path& path, const std::vector<double>& h0,
                   const InputSignal& u, double horizon, int max_jumps, double dt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write request file " + path.string());
  out << "h0";
  for (double v : h0) out << ' ' << format_double(v);
  out << "\ncontrol_times";
  for (double t : u.times) out << ' ' << format_double(t);
  out << "\n";
  for (const auto& cp : u.values) {
    out << "control_values";
    for (double v : cp) out << ' ' << format_double(v);
    out << "\n";
  }
  out << "interpolation "
      << (u.interpolation == InputSignal::Interpolation::piecewise_constant ? "pc" : "pl")
      << "\n";
  out << "T " << format_double(horizon) << "\n";
  out << "J " << max_jumps << "\n";
  out << "dt " << format_double(dt) << "\n";
}

// Runs argv with a wall-clock deadline; kills the child on timeout.
int run_with_timeout(const std::vector<std::string>& argv, double timeout_seconds,
                     const std::filesystem::path& work_dir, bool& timed_out) {
  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("fork failed: " + std::string(strerror(errno)));
  if (pid == 0) {
    if (!work_dir.empty() && ::chdir(work_dir.c_str()) != 0) _exit(127);
    ::execvp(cargv[0], cargv.data());
    _exit(127);
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_seconds);
  timed_out = false;
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw std::runtime_error("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      timed_out = true;
      return -1;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -WTERMSIG(status);
}

} // namespace

TimedStateSequence external_simulate(const ExternalCommand& cmd,
                                     const std::vector<double>& h0,
                                     const InputSignal& u, double horizon,
                                     int max_jumps, double sampling_period,
                                     const std::string& context) {
  if (cmd.argv.empty()) throw std::invalid_argument("external command is empty");
  const std::string tag = context.empty() ? "external simulation" : context;

  std::filesystem::path dir = cmd.work_dir;
  if (dir.empty()) {
    dir = std::filesystem::temp_directory_path() /
          ("cpsconf-" + std::to_string(::getpid()) + "-" +
           std::to_string(stable_hash(tag)));
  }
  std::filesystem::create_directories(dir);
  const auto request = dir / "request.txt";
  const auto response = dir / "response.csv";
  std::error_code ec;
  std::filesystem::remove(response, ec);

  write_request(request, h0, u, horizon, max_jumps, sampling_period);

  auto argv = cmd.argv;
  argv.push_back(request.string());
  argv.push_back(response.string());

  bool timed_out = false;
  const int status = run_with_timeout(argv, cmd.timeout_seconds, dir, timed_out);
  if (timed_out)
    throw std::runtime_error(tag + ": command timed out after " +
                             format_double(cmd.timeout_seconds) + " s");
  if (status != 0)
    throw std::runtime_error(tag + ": command exited with status " +
                             std::to_string(status));

  TimedStateSequence tss = read_trace_csv_file(response);
  return tss.truncated(horizon, max_jumps);
}

} // namespace cpsconf
