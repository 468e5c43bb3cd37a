export class MissingInput extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MissingInput";
  }
}

export class ShapeMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ShapeMismatch";
  }
}
