#include <exception>
#include <iostream>

#include "saloha/config.hpp"
#include "saloha/experiments.hpp"

int main(int argc, char** argv) {
  saloha::cli::ExperimentConfig config;
  try {
    config = saloha::cli::parse_config(argc, argv);
  } catch (const saloha::cli::HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const saloha::cli::ConfigError& e) {
    std::cerr << "saloha: " << e.what() << '\n';
    return 2;
  }
  try {
    return saloha::cli::run(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "saloha " << saloha::cli::command_name(config.command) << ": " << e.what() << '\n';
    return 3;
  }
}
