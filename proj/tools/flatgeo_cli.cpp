#include "flatgeo/parse.hpp"
#include <cstdio>
int main(int argc, char** argv) {
    (void)argc; (void)argv;
    std::puts("flatgeo: not wired up yet");
    return 2;
}
