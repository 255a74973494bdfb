#include <vector>
#include <string>

#include "preictal/cli.hpp"

int main(int argc, char** argv) {
    return preictal::cli(std::vector<std::string>(argv + 1, argv + argc));
}
