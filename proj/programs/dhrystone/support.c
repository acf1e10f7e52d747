/* Freestanding runtime for the simulator: UART output, cycle CSR, string
 * helpers and a bump allocator. Built with -fno-builtin so the copy loops
 * are not turned back into calls to themselves. */
#include "dhry.h"

#define UART_TX (*(volatile unsigned *)0x10001000u)

/* Aligned word copy with a byte tail, as newlib does. */
void *memcpy(void *d, const void *s, __SIZE_TYPE__ n) {
  char *dp = d;
  const char *sp = s;
  if ((((unsigned long)dp | (unsigned long)sp) & 3) == 0) {
    unsigned *wd = (unsigned *)dp;
    const unsigned *ws = (const unsigned *)sp;
    for (; n >= 16; n -= 16, wd += 4, ws += 4) {
      wd[0] = ws[0];
      wd[1] = ws[1];
      wd[2] = ws[2];
      wd[3] = ws[3];
    }
    for (; n >= 4; n -= 4) *wd++ = *ws++;
    dp = (char *)wd;
    sp = (const char *)ws;
  }
  while (n--) *dp++ = *sp++;
  return d;
}

void *memset(void *d, int c, __SIZE_TYPE__ n) {
  char *dp = d;
  while (n--) *dp++ = (char)c;
  return d;
}

int memcmp(const void *a, const void *b, __SIZE_TYPE__ n) {
  const unsigned char *pa = a, *pb = b;
  for (; n; --n, ++pa, ++pb)
    if (*pa != *pb) return *pa - *pb;
  return 0;
}

char *strcpy(char *d, const char *s) {
  char *r = d;
  while ((*d++ = *s++) != 0) {
  }
  return r;
}

/* Word at a time while both strings are aligned, as newlib does. */
int strcmp(const char *a, const char *b) {
  if ((((unsigned long)a | (unsigned long)b) & 3) == 0) {
    const unsigned *wa = (const unsigned *)a;
    const unsigned *wb = (const unsigned *)b;
    while (*wa == *wb) {
      const unsigned w = *wa;
      if ((w - 0x01010101u) & ~w & 0x80808080u) return 0;
      ++wa;
      ++wb;
    }
    a = (const char *)wa;
    b = (const char *)wb;
  }
  while (*a && *a == *b) {
    ++a;
    ++b;
  }
  return (unsigned char)*a - (unsigned char)*b;
}

static char heap[1024];
static __SIZE_TYPE__ heap_used;

void *malloc(__SIZE_TYPE__ n) {
  void *p = heap + heap_used;
  heap_used += (n + 7) & ~(__SIZE_TYPE__)7;
  return p;
}

void put_str(const char *s) {
  while (*s) UART_TX = (unsigned char)*s++;
}

void put_uint(unsigned v) {
  char buf[12];
  int i = 0;
  do {
    buf[i++] = (char)('0' + v % 10);
    v /= 10;
  } while (v);
  while (i) UART_TX = (unsigned char)buf[--i];
}

unsigned read_cycle(void) {
  unsigned c;
  __asm__ volatile("rdcycle %0" : "=r"(c));
  return c;
}
