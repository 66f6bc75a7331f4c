// Self-contained MD5 (RFC 1321) over UTF-8 input, for the live entry-ID
// preview in the test-bank editor.  Entry IDs are "<query_id>/<md5 of the
// entry text>"; the server's response remains the authority on commit.

const SHIFTS = [
  7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22,
  5, 9, 14, 20, 5, 9, 14, 20, 5, 9, 14, 20, 5, 9, 14, 20,
  4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23,
  6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21,
];

const SINES = [
  0xd76aa478, 0xe8c7b756, 0x242070db, 0xc1bdceee,
  0xf57c0faf, 0x4787c62a, 0xa8304613, 0xfd469501,
  0x698098d8, 0x8b44f7af, 0xffff5bb1, 0x895cd7be,
  0x6b901122, 0xfd987193, 0xa679438e, 0x49b40821,
  0xf61e2562, 0xc040b340, 0x265e5a51, 0xe9b6c7aa,
  0xd62f105d, 0x02441453, 0xd8a1e681, 0xe7d3fbc8,
  0x21e1cde6, 0xc33707d6, 0xf4d50d87, 0x455a14ed,
  0xa9e3e905, 0xfcefa3f8, 0x676f02d9, 0x8d2a4c8a,
  0xfffa3942, 0x8771f681, 0x6d9d6122, 0xfde5380c,
  0xa4beea44, 0x4bdecfa9, 0xf6bb4b60, 0xbebfbc70,
  0x289b7ec6, 0xeaa127fa, 0xd4ef3085, 0x04881d05,
  0xd9d4d039, 0xe6db99e5, 0x1fa27cf8, 0xc4ac5665,
  0xf4292244, 0x432aff97, 0xab9423a7, 0xfc93a039,
  0x655b59c3, 0x8f0ccc92, 0xffeff47d, 0x85845dd1,
  0x6fa87e4f, 0xfe2ce6e0, 0xa3014314, 0x4e0811a1,
  0xf7537e82, 0xbd3af235, 0x2ad7d2bb, 0xeb86d391,
];

function rotateLeft(value: number, bits: number): number {
  return ((value << bits) | (value >>> (32 - bits))) >>> 0;
}

function wordToHex(word: number): string {
  let hex = "";
  for (let byte = 0; byte < 4; byte += 1) {
    hex += ((word >>> (byte * 8)) & 0xff).toString(16).padStart(2, "0");
  }
  return hex;
}

export function md5Hex(input: string): string {
  const bytes = new TextEncoder().encode(input);
  const paddedLength = (((bytes.length + 8) >> 6) + 1) << 6;
  const buffer = new Uint8Array(paddedLength);
  buffer.set(bytes);
  buffer[bytes.length] = 0x80;
  const view = new DataView(buffer.buffer);
  const bitCount = bytes.length * 8;
  view.setUint32(paddedLength - 8, bitCount >>> 0, true);
  view.setUint32(paddedLength - 4, Math.floor(bitCount / 4294967296), true);

  let a0 = 0x67452301;
  let b0 = 0xefcdab89;
  let c0 = 0x98badcfe;
  let d0 = 0x10325476;

  for (let chunk = 0; chunk < paddedLength; chunk += 64) {
    const words: number[] = [];
    for (let j = 0; j < 16; j += 1) {
      words.push(view.getUint32(chunk + j * 4, true));
    }
    let [a, b, c, d] = [a0, b0, c0, d0];
    for (let i = 0; i < 64; i += 1) {
      let mix: number;
      let wordIndex: number;
      if (i < 16) {
        mix = (b & c) | (~b & d);
        wordIndex = i;
      } else if (i < 32) {
        mix = (d & b) | (~d & c);
        wordIndex = (5 * i + 1) % 16;
      } else if (i < 48) {
        mix = b ^ c ^ d;
        wordIndex = (3 * i + 5) % 16;
      } else {
        mix = c ^ (b | ~d);
        wordIndex = (7 * i) % 16;
      }
      const spun = (mix + a + SINES[i] + words[wordIndex]) >>> 0;
      a = d;
      d = c;
      c = b;
      b = (b + rotateLeft(spun, SHIFTS[i])) >>> 0;
    }
    a0 = (a0 + a) >>> 0;
    b0 = (b0 + b) >>> 0;
    c0 = (c0 + c) >>> 0;
    d0 = (d0 + d) >>> 0;
  }
  return wordToHex(a0) + wordToHex(b0) + wordToHex(c0) + wordToHex(d0);
}

export function entryIdPreview(queryId: string, text: string): string {
  return `${queryId}/${md5Hex(text)}`;
}
