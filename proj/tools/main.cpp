#include <secretsniff/cli.hpp>

#include <csignal>
#include <iostream>

namespace {

extern "C" void
on_signal(int)
{
  secretsniff::interrupt_requested().store(true);
}

} // namespace

int
main(int argc, char** argv)
{
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<std::string> args(argv + 1, argv + argc);
  return secretsniff::run_cli(args, std::cin, std::cout, std::cerr);
}
