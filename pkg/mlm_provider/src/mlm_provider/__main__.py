"""Run the provider with uvicorn: `mlm-provider [--model NAME] [--port P]`."""

import argparse


def main() -> int:
    import uvicorn

    from .app import create_app
    from .backends import SyntheticBackend, TransformersFillMaskBackend

    parser = argparse.ArgumentParser(prog="mlm-provider")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8571)
    parser.add_argument("--model", default=None,
                        help="fill-mask model name; omit for the synthetic backend")
    parser.add_argument("--vocab-size", type=int, default=1000,
                        help="vocabulary size of the synthetic backend")
    args = parser.parse_args()

    if args.model:
        backend = TransformersFillMaskBackend(args.model)
        backend.load()
    else:
        backend = SyntheticBackend(vocab_size=args.vocab_size)
    uvicorn.run(create_app(backend), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
