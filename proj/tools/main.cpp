#include <string>
#include <vector>

#include "codetopics/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return codetopics::run_cli(args);
}
