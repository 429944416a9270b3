#include <filesystem>
#include <iostream>

#include "fieldlens/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    auto result = fieldlens::cli::execute(args, std::filesystem::current_path());
    std::cout << result.stdout_text();
    std::cerr << result.diagnostics;
    return result.exit_code;
}
