#include <vector>

#include "tlcp/cli.hpp"

int main(int argc, char** argv) {
    return tlcp::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
