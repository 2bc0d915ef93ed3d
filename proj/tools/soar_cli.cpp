#include <vector>

#include "soar/cli.hpp"

int main(int argc, char** argv) {
    return soar::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
