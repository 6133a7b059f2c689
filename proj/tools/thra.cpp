#include <string>
#include <vector>

#include "thra/cli.hpp"

int main(int argc, char** argv) {
    return thra::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
