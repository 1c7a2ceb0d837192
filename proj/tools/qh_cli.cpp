#include <cstdio>
int main() { std::puts("qh: command-line front end not wired yet"); return 2; }
