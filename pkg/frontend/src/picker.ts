/**
 * Two-level category/element picker.
 *
 * Populated solely from the /api/taxonomy payload; this module holds no
 * label constants of its own.
 */

import type { Taxonomy } from "./types.js";

export interface LeafChoice {
  category: string;
  element: string;
}

export class TaxonomyPicker {
  private categorySelect: HTMLSelectElement;
  private elementSelect: HTMLSelectElement;

  constructor(
    container: HTMLElement,
    private taxonomy: Taxonomy,
  ) {
    this.categorySelect = document.createElement("select");
    this.elementSelect = document.createElement("select");
    this.categorySelect.classList.add("picker-category");
    this.elementSelect.classList.add("picker-element");
    for (const cat of taxonomy.categories) {
      const option = document.createElement("option");
      option.value = cat.name;
      option.textContent = cat.name;
      this.categorySelect.appendChild(option);
    }
    this.categorySelect.addEventListener("change", () => this.fillElements());
    this.fillElements();
    container.appendChild(this.categorySelect);
    container.appendChild(this.elementSelect);
  }

  private fillElements(): void {
    const cat = this.taxonomy.categories.find(
      (c) => c.name === this.categorySelect.value,
    );
    this.elementSelect.innerHTML = "";
    for (const leaf of cat?.elements ?? []) {
      const option = document.createElement("option");
      option.value = leaf;
      option.textContent = leaf;
      this.elementSelect.appendChild(option);
    }
  }

  get choice(): LeafChoice {
    return {
      category: this.categorySelect.value,
      element: this.elementSelect.value,
    };
  }

  set choice(value: LeafChoice) {
    this.categorySelect.value = value.category;
    this.fillElements();
    this.elementSelect.value = value.element;
  }

  setDisabled(disabled: boolean): void {
    this.categorySelect.disabled = disabled;
    this.elementSelect.disabled = disabled;
  }
}
